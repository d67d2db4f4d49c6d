#pragma once

// Explicit covariance matrices of the entanglement-based picture: two-mode
// squeezed source, channel, detector beam splitter with an EPR pair F0 G
// modelling inefficiency and electronic noise, and the state of A F G
// conditioned on Bob's measurement. Used as an independent check of the
// closed-form eigenvalues.

#include <Eigen/Dense>
#include <array>

#include "ddqkd/security.hpp"

namespace ddqkd {

struct ConditionalCovariance {
    Eigen::Matrix4d gamma_ab1;
    Eigen::MatrixXd gamma_afgb3;    // 8x8, modes A F G B3
    Eigen::MatrixXd gamma_afg;      // 6x6
    Eigen::MatrixXd sigma_afgb3;    // 6x2
    Eigen::Matrix2d gamma_b3;
    Eigen::MatrixXd gamma_afg_cond; // 6x6

    std::array<double, 2> lambda_channel{};      // from gamma_ab1
    std::array<double, 3> lambda_conditional{};  // from gamma_afg_cond, descending
    bool limit_path = false;  // eta = 1 with v_el > 0: closed-form lambda_3,4
};

// Symplectic spectrum, descending, one value per mode.
Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& gamma);

ConditionalCovariance build_conditional_covariance(const SecurityParams& p);

}  // namespace ddqkd
