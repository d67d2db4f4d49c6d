#include "ddqkd/estimation.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace ddqkd {

std::vector<cplx> normalize_to_snu(std::span<const cplx> raw, const CalibrationRecord& cal) {
    cal.validate();
    const double s = 1.0 / std::sqrt(cal.snu_per_quadrature);
    std::vector<cplx> out(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) out[k] = raw[k] * s;
    return out;
}

void EstimationAccumulator::add(std::span<const cplx> tx, std::span<const cplx> rx) {
    if (tx.size() != rx.size()) throw std::invalid_argument("estimate_parameters: frames differ in length");
    for (std::size_t k = 0; k < tx.size(); ++k) {
        const double x[2] = {tx[k].real(), tx[k].imag()};
        const double y[2] = {rx[k].real(), rx[k].imag()};
        for (int q = 0; q < 2; ++q) {
            sx_[q] += x[q];
            sy_[q] += y[q];
            sxx_[q] += x[q] * x[q];
            syy_[q] += y[q] * y[q];
            sxy_[q] += x[q] * y[q];
        }
    }
    n_ += tx.size();
}

void EstimationAccumulator::merge(const EstimationAccumulator& o) {
    for (int q = 0; q < 2; ++q) {
        sx_[q] += o.sx_[q];
        sy_[q] += o.sy_[q];
        sxx_[q] += o.sxx_[q];
        syy_[q] += o.syy_[q];
        sxy_[q] += o.sxy_[q];
    }
    n_ += o.n_;
}

ParameterEstimate EstimationAccumulator::result(double eta, double v_el) const {
    if (n_ < 2) throw std::invalid_argument("estimate_parameters: need at least two symbols");
    if (!(eta > 0.0)) throw std::invalid_argument("estimate_parameters: eta must be > 0");
    const double n = static_cast<double>(n_);
    double var_x = 0.0, var_y = 0.0, cov = 0.0;
    for (int q = 0; q < 2; ++q) {
        const double mx = sx_[q] / n;
        const double my = sy_[q] / n;
        var_x += 0.5 * (sxx_[q] / n - mx * mx);
        var_y += 0.5 * (syy_[q] / n - my * my);
        cov += 0.5 * (sxy_[q] / n - mx * my);
    }
    if (!(var_x > 0.0)) throw std::invalid_argument("estimate_parameters: degenerate (zero-variance) tx");

    ParameterEstimate e;
    e.n_symbols_used = n_;
    e.v_a_hat = var_x;
    const double t_amp = cov / var_x;
    e.t_hat = 2.0 * t_amp * t_amp / eta;
    const double residual = var_y - t_amp * t_amp * var_x;
    e.eps_hat = e.t_hat > 0.0 ? (residual - 1.0 - v_el) * 2.0 / (eta * e.t_hat) : 0.0;

    // 2n real samples enter each second moment.
    e.v_a_sd = var_x / std::sqrt(n);
    const double sd_amp = std::sqrt(std::max(residual, 0.0) / (2.0 * n * var_x));
    e.t_sd = 4.0 * std::abs(t_amp) * sd_amp / eta;
    if (e.t_hat > 0.0) {
        const double from_noise = 2.0 * residual / (eta * e.t_hat * std::sqrt(n));
        const double from_t = std::abs(e.eps_hat) * e.t_sd / e.t_hat;
        e.eps_sd = std::hypot(from_noise, from_t);
    }
    return e;
}

ParameterEstimate estimate_parameters(std::span<const cplx> tx, std::span<const cplx> rx, double eta, double v_el) {
    if (tx.empty()) throw std::invalid_argument("estimate_parameters: empty frame");
    EstimationAccumulator acc;
    acc.add(tx, rx);
    return acc.result(eta, v_el);
}

void write_estimate_header(std::ostream& out) { out << "frame,user,v_a_hat,t_hat,eps_hat\n"; }

void write_estimate_row(std::ostream& out, std::size_t frame, std::size_t user, const ParameterEstimate& e) {
    fmt::print(out, "{},{},{:.17g},{:.17g},{:.17g}\n", frame, user, e.v_a_hat, e.t_hat, e.eps_hat);
}

}  // namespace ddqkd
