#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace slqg {

enum class FMethod { monte_carlo, fixed_point, synthetic };

const char* to_string(FMethod m);

// Finiteness probabilities F(p) for p = 0..p_max with F(0) = 1. Values past
// p_max are read as `beyond` (0 by default, which makes every tilt built on
// the table a lower bound).
struct FTable {
    std::vector<double> values;
    std::vector<double> std_errors;
    FMethod method = FMethod::synthetic;
    double beyond = 0;
    std::string notes;

    std::uint64_t p_max() const { return values.empty() ? 0 : values.size() - 1; }
    double at(std::uint64_t m) const { return m < values.size() ? values[m] : beyond; }
    double h(std::uint64_t m) const;

    static FTable constant_one(std::uint64_t p_max);
    static FTable from_values(std::vector<double> v, double beyond = 0);

    // F(0) = 1, every stored value in (0, 1]
    void validate(bool allow_zero = false) const;
    void write_csv(std::ostream& os) const;
};

} // namespace slqg
