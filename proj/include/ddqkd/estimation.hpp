#pragma once

// SNU normalization and (V_A, T, eps) estimation under the heterodyne
// measurement model y = sqrt(eta T / 2) x + z, Var(z) = 1 + eta T eps / 2 + v_el,
// applied to each quadrature.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "ddqkd/calibration.hpp"

namespace ddqkd {

struct ParameterEstimate {
    double v_a_hat = 0.0;
    double t_hat = 0.0;
    double eps_hat = 0.0;
    std::size_t n_symbols_used = 0;

    // Large-sample standard errors.
    double v_a_sd = 0.0;
    double t_sd = 0.0;
    double eps_sd = 0.0;

    bool eps_negative() const { return eps_hat < 0.0; }
};

std::vector<cplx> normalize_to_snu(std::span<const cplx> raw, const CalibrationRecord& cal);

// Streaming sums over paired frames.
class EstimationAccumulator {
public:
    void add(std::span<const cplx> tx, std::span<const cplx> rx_normalized);
    // Adds another accumulator's sums; merge order fixes the rounding.
    void merge(const EstimationAccumulator& other);
    ParameterEstimate result(double eta, double v_el) const;
    std::size_t size() const { return n_; }

private:
    std::size_t n_ = 0;
    // per quadrature: sum x, sum y, sum x^2, sum y^2, sum x y
    double sx_[2] = {0, 0}, sy_[2] = {0, 0}, sxx_[2] = {0, 0}, syy_[2] = {0, 0}, sxy_[2] = {0, 0};
};

ParameterEstimate estimate_parameters(std::span<const cplx> tx, std::span<const cplx> rx_normalized, double eta,
                                      double v_el);

// CSV `frame,user,v_a_hat,t_hat,eps_hat`
void write_estimate_header(std::ostream& out);
void write_estimate_row(std::ostream& out, std::size_t frame, std::size_t user, const ParameterEstimate& e);

}  // namespace ddqkd
