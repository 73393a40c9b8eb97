#include "slqg/ftable.hpp"

#include "slqg/errors.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace slqg {

const char* to_string(FMethod m)
{
    switch (m) {
    case FMethod::monte_carlo:
        return "monte-carlo";
    case FMethod::fixed_point:
        return "fixed-point";
    case FMethod::synthetic:
        return "synthetic";
    }
    return "?";
}

double FTable::h(std::uint64_t m) const
{
    const double f = at(m);
    return f > 0 ? -std::log(f) : std::numeric_limits<double>::infinity();
}

FTable FTable::constant_one(std::uint64_t p_max)
{
    FTable t;
    t.values.assign(p_max + 1, 1.0);
    t.std_errors.assign(p_max + 1, 0.0);
    t.beyond = 1;
    return t;
}

FTable FTable::from_values(std::vector<double> v, double beyond)
{
    FTable t;
    t.values = std::move(v);
    t.std_errors.assign(t.values.size(), 0.0);
    t.beyond = beyond;
    t.validate();
    return t;
}

void FTable::validate(bool allow_zero) const
{
    if (values.empty() || values[0] != 1.0)
        throw DomainError("F table must start with F(0) = 1");
    for (std::size_t p = 1; p < values.size(); ++p) {
        const double f = values[p];
        if (!(f <= 1) || !(allow_zero ? f >= 0 : f > 0))
            throw DomainError("F(" + std::to_string(p) + ") = " + std::to_string(f) + " outside (0, 1]");
    }
    if (!(beyond >= 0 && beyond <= 1))
        throw DomainError("F beyond the table must lie in [0, 1]");
}

void FTable::write_csv(std::ostream& os) const
{
    os << "p,F,stderr,h\n";
    char buf[160];
    for (std::size_t p = 0; p < values.size(); ++p) {
        const double se = p < std_errors.size() ? std_errors[p] : 0.0;
        std::snprintf(buf, sizeof buf, "%zu,%.12g,%.6g,%.12g\n", p, values[p], se, h(p));
        os << buf;
    }
}

} // namespace slqg
