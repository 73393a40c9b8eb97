#include "slqg/rings.hpp"

#include "slqg/analytic.hpp"
#include "slqg/errors.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace slqg {

namespace {

void check_ring_q(double Q)
{
    if (!(Q > 0 && Q <= 2))
        throw DomainError("ring law needs Q in (0, 2], got " + std::to_string(Q));
}

} // namespace

RingLaw RingLaw::default_floor(double Q)
{
    check_ring_q(Q);
    RingLaw r;
    r.Q_ = Q;
    r.beta_ = beta_q(Q);
    r.e_up_ = std::exp(r.beta_);
    r.e_down_ = std::exp(-r.beta_);
    r.variant_ = RingVariant::default_floor;
    return r;
}

RingLaw RingLaw::zero_inner(double Q)
{
    RingLaw r = default_floor(Q);
    r.variant_ = RingVariant::zero_inner;
    return r;
}

RingLaw RingLaw::custom(double Q, std::map<std::uint64_t, std::vector<RingAtom>> table)
{
    RingLaw r = default_floor(Q);
    r.variant_ = RingVariant::custom_table;
    for (auto& [p, atoms] : table) {
        double total = 0;
        for (auto& a : atoms) {
            if (!(a.prob >= 0))
                throw DomainError("negative ring probability at p = " + std::to_string(p));
            total += a.prob;
        }
        if (std::abs(total - 1) > 1e-9)
            throw DomainError("ring row p = " + std::to_string(p) + " has total mass " + std::to_string(total));
        for (auto& a : atoms)
            a.prob /= total;
    }
    r.table_ = std::move(table);
    if (r.table_.empty())
        throw DomainError("empty ring table");
    return r;
}

RingLaw RingLaw::custom_from_json(double Q, const nlohmann::json& j)
{
    std::map<std::uint64_t, std::vector<RingAtom>> t;
    auto add = [&](const nlohmann::json& row) {
        const auto p = row.at("p").get<std::uint64_t>();
        std::vector<RingAtom> atoms;
        for (const auto& a : row.at("atoms"))
            atoms.push_back({a.at(0).get<std::uint64_t>(), a.at(1).get<double>()});
        t[p] = std::move(atoms);
    };
    if (j.is_array())
        for (const auto& row : j)
            add(row);
    else
        add(j);
    return custom(Q, std::move(t));
}

const std::vector<RingAtom>& RingLaw::table_row(std::uint64_t p) const
{
    auto it = table_.find(p);
    if (it == table_.end())
        throw CoverageError("ring table has no row for p = " + std::to_string(p));
    return it->second;
}

std::uint64_t RingLaw::down_atom(std::uint64_t p) const
{
    return static_cast<std::uint64_t>(std::floor(static_cast<double>(p) * e_down_));
}

std::uint64_t RingLaw::up_atom(std::uint64_t p) const
{
    return static_cast<std::uint64_t>(std::floor(static_cast<double>(p) * e_up_));
}

std::vector<RingAtom> RingLaw::atoms(std::uint64_t p) const
{
    switch (variant_) {
    case RingVariant::zero_inner:
        return {{0, 1.0}};
    case RingVariant::custom_table:
        return table_row(p);
    case RingVariant::default_floor:
        break;
    }
    const auto d = down_atom(p), u = up_atom(p);
    if (d == u)
        return {{d, 1.0}};
    return {{d, 0.5}, {u, 0.5}};
}

std::uint64_t RingLaw::sample(std::uint64_t p, Rng& rng) const
{
    switch (variant_) {
    case RingVariant::zero_inner:
        return 0;
    case RingVariant::default_floor:
        return rng.coin() ? up_atom(p) : down_atom(p);
    case RingVariant::custom_table:
        break;
    }
    const auto& row = table_row(p);
    double u = rng.uniform();
    for (const auto& a : row) {
        if (u < a.prob)
            return a.m;
        u -= a.prob;
    }
    return row.back().m;
}

double RingLaw::tilted_expectation(std::uint64_t p, const FTable& F) const
{
    switch (variant_) {
    case RingVariant::zero_inner:
        return F.at(0);
    case RingVariant::default_floor:
        return 0.5 * (F.at(down_atom(p)) + F.at(up_atom(p)));
    case RingVariant::custom_table:
        break;
    }
    double e = 0;
    for (const auto& a : table_row(p))
        e += a.prob * F.at(a.m);
    return e;
}

std::uint64_t RingLaw::sample_tilted(std::uint64_t p, const FTable& F, Rng& rng) const
{
    const auto row = atoms(p);
    double z = 0;
    for (const auto& a : row)
        z += a.prob * F.at(a.m);
    if (!(z > 0))
        throw ConditioningError("ring at p = " + std::to_string(p) + " has zero finiteness-weighted mass");
    double u = rng.uniform() * z;
    for (const auto& a : row) {
        const double w = a.prob * F.at(a.m);
        if (u < w)
            return a.m;
        u -= w;
    }
    for (auto it = row.rbegin(); it != row.rend(); ++it)
        if (it->prob * F.at(it->m) > 0)
            return it->m;
    return row.back().m;
}

RingLaw::Asymptote RingLaw::tilt_asymptote(const FTable& F) const
{
    switch (variant_) {
    case RingVariant::zero_inner:
        return {0, F.at(0)};
    case RingVariant::custom_table:
        // no information past the table: treat the largest row as the end of coverage
        return {table_.rbegin()->first, std::numeric_limits<double>::quiet_NaN()};
    case RingVariant::default_floor:
        break;
    }
    // past K0 both atoms exceed the table, so E[F] = F.beyond
    const std::uint64_t pm = F.p_max();
    const double kd = (static_cast<double>(pm) + 1) / e_down_;
    auto K0 = static_cast<std::uint64_t>(std::max(0.0, std::ceil(kd) - 1));
    while (down_atom(K0 + 1) <= pm)
        ++K0;
    while (K0 > 0 && down_atom(K0) > pm)
        --K0;
    return {K0, F.beyond};
}

nlohmann::json RingLaw::validate_table(double delta) const
{
    nlohmann::json rep;
    if (variant_ != RingVariant::custom_table) {
        rep["applicable"] = false;
        return rep;
    }
    rep["applicable"] = true;
    bool nontrivial = true;
    double sup_moment = 0;
    for (const auto& [p, row] : table_) {
        double pos = 0, mom = 0;
        for (const auto& a : row) {
            if (a.m > 0)
                pos += a.prob;
            mom += a.prob * std::pow(static_cast<double>(a.m) / static_cast<double>(p), 2 + delta);
        }
        nontrivial = nontrivial && pos > 0;
        sup_moment = std::max(sup_moment, mom);
    }
    rep["nontrivial"] = nontrivial;
    rep["sup_moment"] = sup_moment;
    rep["moment_order"] = 2 + delta;
    auto lower = nlohmann::json::array();
    for (double lam : {0.5, 1.0, 2.0}) {
        // smallest exponential rate -log E[e^{-lam p Rat}] / p over the table
        double c = std::numeric_limits<double>::infinity();
        for (const auto& [p, row] : table_) {
            double v = 0;
            for (const auto& a : row)
                v += a.prob * std::exp(-lam * static_cast<double>(a.m));
            c = std::min(c, -std::log(v) / static_cast<double>(p));
        }
        lower.push_back({{"lambda", lam}, {"rate", c}, {"pass", c > 0}});
    }
    rep["lower_tail"] = lower;
    return rep;
}

} // namespace slqg
