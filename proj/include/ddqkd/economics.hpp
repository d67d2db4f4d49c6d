#pragma once

// Hardware cost of N-user downstream access networks, in units of one
// photodetector.

#include <array>
#include <iosfwd>
#include <string>

namespace ddqkd {

enum class Scheme { dv, tlo, llo, dd };

constexpr std::array<Scheme, 4> kAllSchemes = {Scheme::dd, Scheme::tlo, Scheme::dv, Scheme::llo};

std::string to_string(Scheme s);
Scheme parse_scheme(const std::string& s);

struct CostModel {
    double c_pd = 1.0;
    double pd = 1.0;
    double bhd = 4.0;
    double spad = 10.0;
    double tunable_laser = 20.0;

    void validate() const;
};

// Head end: one tunable laser. Per user: 2 SPAD (dv), 2 BHD (tlo),
// 2 BHD + laser (llo), 1 PD (dd).
double network_cost(Scheme scheme, int n_users, const CostModel& model = {});

// CSV `scheme,n_users,cost_cpd` for N = 1..n_max
void write_cost_table(std::ostream& out, int n_max, const CostModel& model = {});

}  // namespace ddqkd
