#include "ddqkd/economics.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <ostream>
#include <stdexcept>

namespace ddqkd {

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::dv: return "dv";
        case Scheme::tlo: return "tlo";
        case Scheme::llo: return "llo";
        case Scheme::dd: return "dd";
    }
    return "?";
}

Scheme parse_scheme(const std::string& s) {
    if (s == "dv") return Scheme::dv;
    if (s == "tlo") return Scheme::tlo;
    if (s == "llo") return Scheme::llo;
    if (s == "dd") return Scheme::dd;
    throw std::invalid_argument("unknown scheme `" + s + "` (dv, tlo, llo, dd)");
}

void CostModel::validate() const {
    if (!(c_pd > 0.0 && pd > 0.0 && bhd > 0.0 && spad > 0.0 && tunable_laser > 0.0)) {
        throw std::invalid_argument("cost model: all multipliers must be > 0");
    }
}

double network_cost(Scheme scheme, int n_users, const CostModel& m) {
    if (n_users < 1) throw std::invalid_argument("network_cost: n_users must be >= 1");
    m.validate();
    const double n = n_users;
    double per_user = 0.0;
    switch (scheme) {
        case Scheme::dv: per_user = 2.0 * m.spad; break;
        case Scheme::tlo: per_user = 2.0 * m.bhd; break;
        case Scheme::llo: per_user = 2.0 * m.bhd + m.tunable_laser; break;
        case Scheme::dd: per_user = m.pd; break;
    }
    return m.c_pd * (m.tunable_laser + per_user * n);
}

void write_cost_table(std::ostream& out, int n_max, const CostModel& model) {
    if (n_max < 1) throw std::invalid_argument("cost table: n_max must be >= 1");
    out << "scheme,n_users,cost_cpd\n";
    for (int n = 1; n <= n_max; ++n) {
        for (Scheme s : kAllSchemes) fmt::print(out, "{},{},{}\n", to_string(s), n, network_cost(s, n, model));
    }
}

}  // namespace ddqkd
