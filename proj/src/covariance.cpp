#include "ddqkd/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ddqkd {
namespace {

using Eigen::Matrix2d;
using Eigen::MatrixXd;

Matrix2d identity2() { return Matrix2d::Identity(); }
Matrix2d sigma_z() {
    Matrix2d z;
    z << 1.0, 0.0, 0.0, -1.0;
    return z;
}

MatrixXd omega(int modes) {
    MatrixXd w = MatrixXd::Zero(2 * modes, 2 * modes);
    for (int k = 0; k < modes; ++k) {
        w(2 * k, 2 * k + 1) = 1.0;
        w(2 * k + 1, 2 * k) = -1.0;
    }
    return w;
}

}  // namespace

Eigen::VectorXd symplectic_eigenvalues(const MatrixXd& gamma) {
    const Eigen::Index dim = gamma.rows();
    if (dim % 2 != 0 || gamma.cols() != dim) throw std::invalid_argument("symplectic_eigenvalues: need 2n x 2n");
    const int modes = static_cast<int>(dim / 2);
    Eigen::SelfAdjointEigenSolver<MatrixXd> root(gamma);
    if (root.eigenvalues().minCoeff() <= 0.0) throw std::domain_error("symplectic_eigenvalues: matrix not positive definite");
    const MatrixXd s = root.operatorSqrt();
    const MatrixXd k = s * omega(modes) * s;  // antisymmetric, eigenvalues +-i lambda
    Eigen::SelfAdjointEigenSolver<MatrixXd> sq(k.transpose() * k);
    Eigen::VectorXd ev = sq.eigenvalues();  // ascending, each lambda^2 twice
    Eigen::VectorXd out(modes);
    for (int m = 0; m < modes; ++m) {
        const double a = ev(dim - 1 - 2 * m);
        const double b = ev(dim - 2 - 2 * m);
        out(m) = std::sqrt(std::max(0.5 * (a + b), 0.0));
    }
    return out;
}

ConditionalCovariance build_conditional_covariance(const SecurityParams& p) {
    p.validate();
    const double big_v = p.v();
    const double t = p.t;
    const double eta = p.eta;
    const ChiValues chi = chi_values(p);
    const double c_ab = std::sqrt(t * (big_v * big_v - 1.0));
    const double b1 = t * (big_v + chi.chi_line);
    const Matrix2d i2 = identity2();
    const Matrix2d z = sigma_z();

    ConditionalCovariance out;
    out.gamma_ab1.setZero();
    out.gamma_ab1.block<2, 2>(0, 0) = big_v * i2;
    out.gamma_ab1.block<2, 2>(0, 2) = c_ab * z;
    out.gamma_ab1.block<2, 2>(2, 0) = c_ab * z;
    out.gamma_ab1.block<2, 2>(2, 2) = b1 * i2;
    const auto l12 = symplectic_eigenvalues(out.gamma_ab1);
    out.lambda_channel = {l12(0), l12(1)};

    const bool het = p.heterodyne_like();
    const double elec = het ? 2.0 * p.v_el : p.v_el;
    if (eta == 1.0 && p.v_el > 0.0) {
        out.limit_path = true;
        out.lambda_conditional = symplectic_conditional(p);
        return out;
    }
    const double v = eta == 1.0 ? 1.0 : 1.0 + elec / (1.0 - eta);

    // Modes A, B2, F0, G.
    MatrixXd g0 = MatrixXd::Zero(8, 8);
    g0.block(0, 0, 4, 4) = out.gamma_ab1;
    const double c_fg = std::sqrt(v * v - 1.0);
    g0.block(4, 4, 2, 2) = v * i2;
    g0.block(4, 6, 2, 2) = c_fg * z;
    g0.block(6, 4, 2, 2) = c_fg * z;
    g0.block(6, 6, 2, 2) = v * i2;

    MatrixXd y1 = MatrixXd::Identity(8, 8);
    const double se = std::sqrt(eta);
    const double sl = std::sqrt(1.0 - eta);
    y1.block(2, 2, 2, 2) = se * i2;
    y1.block(2, 4, 2, 2) = sl * i2;
    y1.block(4, 2, 2, 2) = -sl * i2;
    y1.block(4, 4, 2, 2) = se * i2;
    const MatrixXd g_ab3fg = y1 * g0 * y1.transpose();

    // Reorder A B3 F G -> A F G B3.
    const int order[4] = {0, 2, 3, 1};
    MatrixXd g = MatrixXd::Zero(8, 8);
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) g.block(2 * r, 2 * c, 2, 2) = g_ab3fg.block(2 * order[r], 2 * order[c], 2, 2);
    out.gamma_afgb3 = g;
    out.gamma_afg = g.block(0, 0, 6, 6);
    out.sigma_afgb3 = g.block(0, 6, 6, 2);
    out.gamma_b3 = g.block(6, 6, 2, 2);

    Matrix2d inv;
    if (het) {
        inv = (out.gamma_b3 + i2).inverse();
    } else {
        // Moore-Penrose inverse of diag(gamma_b3(0,0), 0).
        inv.setZero();
        inv(0, 0) = 1.0 / out.gamma_b3(0, 0);
    }
    out.gamma_afg_cond = out.gamma_afg - out.sigma_afgb3 * inv * out.sigma_afgb3.transpose();
    const auto l345 = symplectic_eigenvalues(out.gamma_afg_cond);
    out.lambda_conditional = {l345(0), l345(1), l345(2)};
    return out;
}

}  // namespace ddqkd
