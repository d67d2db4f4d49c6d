#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>

#include "ddqkd/covariance.hpp"
#include "ddqkd/security.hpp"

using namespace ddqkd;

namespace {

// Straight transcription of the closed forms, kept apart from the library.
struct Oracle {
    double v_a, t, eps, eta, v_el, beta, f;
    bool het;

    double G(double x) const { return x <= 0 ? 0.0 : (x + 1) * std::log2(x + 1) - x * std::log2(x); }

    double skr() const {
        const double V = v_a + 1;
        const double cl = 1 / t - 1 + eps;
        const double ch = het ? (2 - eta + 2 * v_el) / eta : (1 - eta + v_el) / eta;
        const double ct = cl + ch / t;
        const double iab = (het ? 1.0 : 0.5) * std::log2((V + ct) / (1 + ct));
        const double A = V * V * (1 - 2 * t) + 2 * t + t * t * (V + cl) * (V + cl);
        const double B = t * t * (V * cl + 1) * (V * cl + 1);
        const double l1 = std::sqrt(0.5 * (A + std::sqrt(A * A - 4 * B)));
        const double l2 = std::sqrt(0.5 * (A - std::sqrt(A * A - 4 * B)));
        double C, D;
        const double den = t * (V + ct);
        if (het) {
            C = (A * ch * ch + B + 1 + 2 * ch * (V * std::sqrt(B) + t * (V + cl)) + 2 * t * (V * V - 1)) / (den * den);
            D = std::pow((V + std::sqrt(B) * ch) / den, 2);
        } else {
            C = (V * std::sqrt(B) + t * (V + cl) + A * ch) / den;
            D = std::sqrt(B) * (V + std::sqrt(B) * ch) / den;
        }
        const double l3 = std::sqrt(0.5 * (C + std::sqrt(C * C - 4 * D)));
        const double l4 = std::sqrt(0.5 * (C - std::sqrt(C * C - 4 * D)));
        const double chi = G((l1 - 1) / 2) + G((l2 - 1) / 2) - G((l3 - 1) / 2) - G((l4 - 1) / 2);
        return f * (beta * iab - chi);
    }
};

double z_by_bisection(double eps_pe) {
    double lo = 0, hi = 20;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (std::erfc(mid / std::sqrt(2.0)) > eps_pe ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// |eig(i Omega gamma)|, each value appears twice.
std::vector<double> symplectic_by_eig(const Eigen::MatrixXd& g) {
    const auto n = g.rows() / 2;
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(g.rows(), g.cols());
    for (Eigen::Index k = 0; k < n; ++k) {
        omega(2 * k, 2 * k + 1) = 1;
        omega(2 * k + 1, 2 * k) = -1;
    }
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(std::complex<double>(0, 1) * (omega * g).cast<std::complex<double>>());
    std::vector<double> v;
    for (Eigen::Index k = 0; k < g.rows(); ++k) v.push_back(std::abs(es.eigenvalues()(k)));
    std::sort(v.begin(), v.end(), std::greater<>());
    std::vector<double> out;
    for (std::size_t k = 0; k < v.size(); k += 2) out.push_back(v[k]);
    return out;
}

SecurityParams experiment_user(double v_a, double eps, double v_el) {
    SecurityParams p;
    p.v_a = v_a;
    p.t = std::pow(10.0, -(0.21 * 5 + 6) / 10);
    p.eps = eps;
    p.eta = 0.72;
    p.v_el = v_el;
    p.beta = 0.96;
    p.f_rep = 1e6;
    p.detection = Detection::direct;
    return p;
}

}  // namespace

TEST_CASE("detection names") {
    CHECK(to_string(Detection::homodyne) == "hom");
    CHECK(to_string(Detection::heterodyne) == "het");
    CHECK(to_string(Detection::direct) == "dd");
    CHECK(parse_detection("het") == Detection::heterodyne);
    CHECK_THROWS(parse_detection("balanced"));
}

TEST_CASE("entropy function") {
    CHECK(g_entropy(0.0) == 0.0);
    CHECK(g_entropy(1.0) == doctest::Approx(2.0));
    CHECK(g_entropy(-1e-15) == 0.0);
    CHECK_THROWS(g_entropy(-0.1));
}

TEST_CASE("experimental operating point") {
    const double expected[4] = {55.732e3, 56.915e3, 53.334e3, 54.284e3};
    const SecurityParams users[4] = {experiment_user(7.4496, 0.0237, 0.0178), experiment_user(7.7716, 0.0217, 0.0180),
                                     experiment_user(8.0080, 0.0268, 0.0186), experiment_user(7.5951, 0.0258, 0.0178)};
    for (int u = 0; u < 4; ++u) {
        CAPTURE(u);
        const auto r = skr_asymptotic(users[u]);
        CHECK(r.skr_bps == doctest::Approx(expected[u]).epsilon(0.02));
        CHECK(r.skr_clipped_bps == r.skr_bps);
        CHECK(r.lambdas[4] == 1.0);
        FiniteSizeParams fs;
        const auto f = skr_finite_size(users[u], fs);
        CHECK(f.skr_bps < r.skr_bps);
        CHECK(f.finite_size.has_value());
    }
}

TEST_CASE("library agrees with the transcribed closed form") {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 300; ++i) {
        SecurityParams p;
        p.v_a = 1 + 20 * u01(gen);
        p.t = 0.01 + 0.99 * u01(gen);
        p.eps = 0.2 * u01(gen);
        p.eta = 0.3 + 0.69 * u01(gen);
        p.v_el = 0.3 * u01(gen);
        p.beta = 0.9 + 0.1 * u01(gen);
        p.detection = i % 2 ? Detection::homodyne : Detection::heterodyne;
        const Oracle o{p.v_a, p.t, p.eps, p.eta, p.v_el, p.beta, p.f_rep, p.heterodyne_like()};
        CHECK(skr_asymptotic(p).skr_bps == doctest::Approx(o.skr()).epsilon(1e-9).scale(1e3));
    }
}

TEST_CASE("direct detection uses the heterodyne expressions") {
    SecurityParams p = experiment_user(5.0, 0.05, 0.1);
    p.detection = Detection::heterodyne;
    const double het = skr_asymptotic(p).skr_bps;
    p.detection = Detection::direct;
    CHECK(skr_asymptotic(p).skr_bps == het);
    p.detection = Detection::homodyne;
    CHECK(skr_asymptotic(p).skr_bps != het);
}

TEST_CASE("pure-state point has no eavesdropper information") {
    SecurityParams p;
    p.v_a = 5;
    p.t = 1;
    p.eps = 0;
    p.eta = 1;
    p.v_el = 0;
    p.detection = Detection::heterodyne;
    CHECK(std::abs(holevo_bound(p)) < 1e-9);
    const auto cd = conditional_coefficients(p);
    CHECK(cd.c == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(cd.d == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closed-form eigenvalues match explicit covariance matrices") {
    std::mt19937_64 gen(17);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        SecurityParams p;
        p.v_a = 0.5 + 20 * u01(gen);
        p.t = 0.01 + 0.99 * u01(gen);
        p.eps = 0.2 * u01(gen);
        p.eta = 0.3 + 0.69 * u01(gen);
        p.v_el = 0.3 * u01(gen);
        p.detection = i % 2 ? Detection::homodyne : Detection::heterodyne;
        CAPTURE(i);
        const auto cc = build_conditional_covariance(p);
        const auto ch = symplectic_channel(p);
        const auto cond = symplectic_conditional(p);
        CHECK(cc.lambda_channel[0] == doctest::Approx(ch[0]).epsilon(1e-9));
        CHECK(cc.lambda_channel[1] == doctest::Approx(ch[1]).epsilon(1e-9));
        for (int k = 0; k < 3; ++k) CHECK(cc.lambda_conditional[k] == doctest::Approx(cond[k]).epsilon(1e-9));

        const auto by_eig = symplectic_by_eig(cc.gamma_ab1);
        CHECK(by_eig[0] == doctest::Approx(ch[0]).epsilon(1e-8));
        CHECK(by_eig[1] == doctest::Approx(ch[1]).epsilon(1e-8));
        const auto cond_eig = symplectic_by_eig(cc.gamma_afg_cond);
        for (int k = 0; k < 3; ++k) CHECK(cond_eig[k] == doctest::Approx(cond[k]).epsilon(1e-8));
    }
}

TEST_CASE("library symplectic spectrum of a thermal two-mode state") {
    Eigen::MatrixXd g = Eigen::MatrixXd::Identity(4, 4);
    g.block(0, 0, 2, 2) *= 3.0;
    g.block(2, 2, 2, 2) *= 1.5;
    const auto v = symplectic_eigenvalues(g);
    CHECK(v(0) == doctest::Approx(3.0));
    CHECK(v(1) == doctest::Approx(1.5));
}

TEST_CASE("finite-size terms") {
    FiniteSizeParams fs;
    CHECK(confidence_z(1e-10) == doctest::Approx(z_by_bisection(1e-10)).epsilon(1e-9));
    const double n = fs.n_key;
    const double expected_delta = 7 * std::sqrt(std::log2(1 / fs.eps_smooth) / n) + 2 / n * std::log2(1 / fs.eps_pa);
    CHECK(delta_n(fs) == doctest::Approx(expected_delta).epsilon(1e-12));

    const SecurityParams p = experiment_user(7.4496, 0.0237, 0.0178);
    const auto t = finite_size_terms(p, fs);
    const double sigma2 = p.eta * p.t * p.eps + 1 + p.v_el;
    const double dt = t.z * std::sqrt(sigma2 / (fs.m() * p.v_a));
    CHECK(t.t_min == doctest::Approx(std::pow(std::sqrt(p.eta * p.t) - dt, 2) / p.eta).epsilon(1e-12));
    CHECK(t.eps_max > p.eps);
    CHECK(t.t_min < p.t);

    FiniteSizeParams tiny;
    tiny.n_total = 100;
    tiny.n_key = 50;
    SecurityParams far = p;
    far.t = 1e-4;
    CHECK_THROWS_AS(finite_size_terms(far, tiny), std::domain_error);
    FiniteSizeParams bad;
    bad.n_key = bad.n_total;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("key rate falls with distance and excess noise") {
    SecurityParams p = experiment_user(5.0, 0.05, 0.1);
    double prev = 1e30;
    for (double km = 0; km <= 40; km += 5) {
        p.t = std::pow(10.0, -0.02 * km) * 0.25;
        const double r = skr_asymptotic(p).skr_bps;
        CHECK(r <= prev);
        prev = r;
    }
    p.t = 0.2;
    const double low = skr_asymptotic(p).skr_bps;
    p.eps = 0.08;
    CHECK(skr_asymptotic(p).skr_bps < low);
}

TEST_CASE("negative rates are clipped separately") {
    SecurityParams p = experiment_user(5.0, 0.3, 0.1);
    p.t = 0.01;
    const auto r = skr_asymptotic(p);
    CHECK(r.skr_bps < 0);
    CHECK(r.skr_clipped_bps == 0.0);
}

TEST_CASE("parameter validation") {
    SecurityParams p;
    p.t = 0;
    CHECK_THROWS(skr_asymptotic(p));
    p.t = 0.5;
    p.eta = 1.2;
    CHECK_THROWS(skr_asymptotic(p));
}

TEST_CASE("quantum efficiency from responsivity") {
    CHECK(quantum_efficiency_from_responsivity(0.9, 1550e-9) == doctest::Approx(0.72).epsilon(0.002));
    CHECK_THROWS_AS(quantum_efficiency_from_responsivity(2.0, 1550e-9), std::domain_error);
    CHECK_THROWS(quantum_efficiency_from_responsivity(-1.0, 1550e-9));
}
