#pragma once

// Secret key rates for Gaussian-modulated coherent states under collective
// attacks with reverse reconciliation. Direct detection uses the heterodyne
// expressions.

#include <array>
#include <optional>
#include <string>

namespace ddqkd {

enum class Detection { homodyne, heterodyne, direct };

std::string to_string(Detection d);
Detection parse_detection(const std::string& s);

struct SecurityParams {
    double v_a = 5.0;
    double t = 1.0;
    double eps = 0.0;
    double eta = 1.0;
    double v_el = 0.0;
    double beta = 0.95;
    double f_rep = 1e6;
    Detection detection = Detection::heterodyne;

    double v() const { return v_a + 1.0; }
    bool heterodyne_like() const { return detection != Detection::homodyne; }
    void validate() const;
};

struct FiniteSizeParams {
    double n_total = 1e9;
    double n_key = 0.5e9;
    double eps_smooth = 1e-10;
    double eps_pa = 1e-10;
    double eps_pe = 1e-10;

    double m() const { return n_total - n_key; }
    void validate() const;
};

struct ChiValues {
    double chi_line = 0.0;
    double chi_det = 0.0;
    double chi_tot = 0.0;
};

struct FiniteSizeTerms {
    double delta_n = 0.0;
    double t_min = 0.0;
    double eps_max = 0.0;
    double z = 0.0;
};

struct SkrResult {
    double skr_bps = 0.0;          // raw, may be negative
    double skr_clipped_bps = 0.0;  // max(skr, 0)
    double i_ab = 0.0;
    double chi_be = 0.0;
    std::array<double, 5> lambdas{};
    ChiValues chi;
    std::optional<FiniteSizeTerms> finite_size;
};

ChiValues chi_values(const SecurityParams& p);
double mutual_information(const SecurityParams& p);
double g_entropy(double x);

struct ChannelCoefficients {
    double a = 0.0;
    double b = 0.0;
};
struct ConditionalCoefficients {
    double c = 0.0;
    double d = 0.0;
};

ChannelCoefficients channel_coefficients(const SecurityParams& p);
ConditionalCoefficients conditional_coefficients(const SecurityParams& p);

std::array<double, 2> symplectic_channel(const SecurityParams& p);
std::array<double, 3> symplectic_conditional(const SecurityParams& p);

double holevo_bound(const SecurityParams& p);

SkrResult skr_asymptotic(const SecurityParams& p);

// Two-sided Gaussian quantile sqrt(2) erfinv(1 - eps_pe).
double confidence_z(double eps_pe);
double delta_n(const FiniteSizeParams& fs);
FiniteSizeTerms finite_size_terms(const SecurityParams& p, const FiniteSizeParams& fs);
SkrResult skr_finite_size(const SecurityParams& p, const FiniteSizeParams& fs);

// eta = (h c / q) Re / lambda
double quantum_efficiency_from_responsivity(double re_a_per_w, double wavelength_m);

}  // namespace ddqkd
