#include "slqg/supermap.hpp"

#include "slqg/errors.hpp"
#include "slqg/parallel.hpp"
#include "slqg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace slqg {

void ModelConfig::validate() const
{
    if (!(Q > 0 && Q < 2))
        throw DomainError("Q must lie strictly inside (0, 2), got " + std::to_string(Q));
    if (p_max < 1)
        throw DomainError("p_max must be at least 1");
    if (max_generations < 1)
        throw DomainError("max_generations must be at least 1");
}

nlohmann::json ModelConfig::to_json() const
{
    const char* ring_name = ring == RingVariant::default_floor ? "default-floor"
                            : ring == RingVariant::zero_inner  ? "zero-inner"
                                                               : "custom-table";
    return {{"Q", Q},
            {"c_tail", c_tail},
            {"p_max", p_max},
            {"perimeter_cap", perimeter_cap},
            {"max_generations", max_generations},
            {"step_budget", step_budget},
            {"root_tol", root_tol},
            {"ring", ring_name}};
}

namespace {

RingLaw ring_for(const ModelConfig& cfg)
{
    switch (cfg.ring) {
    case RingVariant::zero_inner:
        return RingLaw::zero_inner(cfg.Q);
    case RingVariant::custom_table:
        throw DomainError("a custom ring table must be passed explicitly");
    case RingVariant::default_floor:
        break;
    }
    return RingLaw::default_floor(cfg.Q);
}

const ModelConfig& checked(const ModelConfig& c)
{
    c.validate();
    return c;
}

} // namespace

SupermapModel::SupermapModel(const ModelConfig& cfg) : SupermapModel(cfg, ring_for(checked(cfg))) {}

SupermapModel::SupermapModel(const ModelConfig& cfg, RingLaw ring)
    : cfg_(checked(cfg)),
      mu_(make_default_critical_mu(cfg.c_tail)),
      q_(weights_from_mu(mu_)),
      sampler_(mu_),
      ring_(std::move(ring))
{
}

WalkOptions SupermapModel::walk_options() const
{
    WalkOptions w;
    w.step_budget = cfg_.step_budget;
    return w;
}

GenerationState GenerationState::root(std::uint64_t p)
{
    GenerationState s;
    s.active.push_back({{}, p});
    return s;
}

nlohmann::json CascadeRecord::to_json() const
{
    nlohmann::json j;
    j["p"] = p;
    j["finite"] = finite;
    j["generations"] = generations_used;
    if (finite)
        j["tperm"] = tperm;
    else
        j["tperm"] = nullptr;
    auto arr = nlohmann::json::array();
    for (const auto& n : nodes)
        arr.push_back({word_to_string(n.word), n.outer, n.inner});
    j["nodes"] = arr;
    return j;
}

GenerationResult step_generation(const GenerationState& state, const StepSampler& gasket, const RingLaw& ring, Rng& rng,
                                 const FTable* tilt, std::uint64_t perimeter_cap, const WalkOptions& walk,
                                 bool record_faces)
{
    if (state.active.empty())
        throw DomainError("step_generation needs a nonempty active set");
    GenerationResult res;
    res.next.generation = state.generation + 1;
    std::uint64_t total = 0;
    for (const auto& a : state.active) {
        const auto faces = sample_boltzmann_perimeters(gasket, a.inner, rng, walk);
        res.face_count += faces.size();
        for (std::size_t j = 0; j < faces.size(); ++j) {
            const std::uint64_t k = faces[j];
            const std::uint64_t m = tilt ? ring.sample_tilted(k, *tilt, rng) : ring.sample(k, rng);
            const bool keep_word = record_faces || m > 0;
            UlamWord w = keep_word ? child_word(a.word, static_cast<std::uint32_t>(j + 1)) : UlamWord{};
            if (m > 0) {
                total += m;
                res.next.active.push_back({record_faces ? w : std::move(w), m});
            }
            if (record_faces)
                res.faces.push_back({std::move(w), k, m});
            if (total > perimeter_cap) {
                res.blown_up = true;
                return res;
            }
        }
    }
    return res;
}

namespace {

CascadeRecord run_cascade(std::uint64_t p, const StepSampler& gasket, const RingLaw& ring, const FTable* tilt,
                          const ModelConfig& cfg, std::uint32_t max_generations, Rng& rng, bool record_nodes,
                          const WalkOptions& walk)
{
    CascadeRecord rec;
    rec.p = p;
    GenerationState st = GenerationState::root(p);
    while (!st.active.empty()) {
        if (rec.generations_used >= max_generations) {
            rec.censor = Censor::generation_cap;
            return rec;
        }
        GenerationResult r;
        try {
            r = step_generation(st, gasket, ring, rng, tilt, cfg.perimeter_cap, walk, record_nodes);
        } catch (const BudgetExceeded&) {
            rec.censor = Censor::step_budget;
            return rec;
        }
        ++rec.generations_used;
        if (record_nodes)
            for (auto& f : r.faces)
                rec.nodes.push_back(std::move(f));
        if (r.blown_up) {
            rec.censor = Censor::perimeter_cap;
            return rec;
        }
        st = std::move(r.next);
    }
    rec.finite = true;
    if (record_nodes)
        rec.tperm = compute_tperm(rec);
    return rec;
}

} // namespace

CascadeRecord sample_unconditioned(const SupermapModel& model, std::uint64_t p, std::uint32_t max_generations, Rng& rng,
                                   bool record_nodes)
{
    if (p < 1)
        throw DomainError("p must be at least 1");
    return run_cascade(p, model.sampler(), model.ring(), nullptr, model.config(), max_generations, rng, record_nodes,
                       model.walk_options());
}

std::uint64_t compute_tperm(const CascadeRecord& r)
{
    if (!r.finite)
        throw DomainError("total perimeter is undefined for an infinite record");
    std::uint64_t t = r.p;
    for (const auto& n : r.nodes)
        t += n.outer + n.inner;
    return t;
}

FTable estimate_F_monte_carlo(const SupermapModel& model, std::uint64_t p_max, std::size_t n_runs,
                              std::uint32_t max_generations, std::uint64_t seed, unsigned threads)
{
    if (n_runs < 100)
        throw DomainError("estimate_F_monte_carlo needs at least 100 runs");
    if (p_max < 1)
        throw DomainError("p_max must be at least 1");
    const std::size_t total = p_max * n_runs;
    std::vector<std::uint8_t> outcome(total);
    parallel_for(total, threads, [&](std::size_t i) {
        const std::uint64_t p = i / n_runs + 1;
        Rng rng = make_stream(seed, p, i % n_runs);
        const auto rec = sample_unconditioned(model, p, max_generations, rng, false);
        outcome[i] = rec.finite ? 0 : (rec.censor == Censor::generation_cap ? 2 : 1);
    });
    FTable t;
    t.method = FMethod::monte_carlo;
    t.values.assign(p_max + 1, 1.0);
    t.std_errors.assign(p_max + 1, 0.0);
    std::size_t cap_hits = 0, gen_hits = 0;
    for (std::uint64_t p = 1; p <= p_max; ++p) {
        std::size_t fin = 0;
        for (std::size_t r = 0; r < n_runs; ++r) {
            const auto o = outcome[(p - 1) * n_runs + r];
            fin += (o == 0);
            cap_hits += (o == 1);
            gen_hits += (o == 2);
        }
        const double f = static_cast<double>(fin) / static_cast<double>(n_runs);
        t.values[p] = f;
        t.std_errors[p] = binomial_std_error(f, n_runs);
    }
    t.beyond = 0;
    t.notes = "censored runs counted infinite: perimeter_cap=" + std::to_string(cap_hits) +
              " generation_cap=" + std::to_string(gen_hits) + " (cap " +
              std::to_string(model.config().perimeter_cap) + ", generations " + std::to_string(max_generations) +
              "); estimates are biased downward by censoring";
    return t;
}

FTable estimate_F_fixed_point(const SupermapModel& model, std::uint64_t p_max, std::size_t n_sweeps,
                              std::size_t n_mc, std::uint64_t seed, unsigned threads, FixedPointTrace* trace)
{
    if (p_max < 1 || n_sweeps < 1 || n_mc < 1)
        throw DomainError("fixed point needs p_max, n_sweeps and n_mc_per_sweep >= 1");
    // common random numbers: one frozen set of gaskets per p, reused by every sweep
    struct GasketSet {
        std::vector<std::size_t> offset;
        std::vector<std::uint64_t> faces;
    };
    std::vector<GasketSet> sets(p_max + 1);
    const auto walk = model.walk_options();
    parallel_for(p_max, threads, [&](std::size_t i) {
        const std::uint64_t p = i + 1;
        GasketSet& g = sets[p];
        g.offset.reserve(n_mc + 1);
        g.offset.push_back(0);
        for (std::size_t r = 0; r < n_mc; ++r) {
            Rng rng = make_stream(seed ^ 0x6a09e667f3bcc908ull, p, r);
            const auto f = sample_boltzmann_perimeters(model.sampler(), p, rng, walk);
            g.faces.insert(g.faces.end(), f.begin(), f.end());
            g.offset.push_back(g.faces.size());
        }
    });
    FTable cur;
    cur.method = FMethod::fixed_point;
    cur.values.assign(p_max + 1, 1.0);
    cur.std_errors.assign(p_max + 1, 0.0);
    for (std::uint64_t p = 1; p <= p_max; ++p) {
        std::size_t empty = 0;
        for (std::size_t r = 0; r < n_mc; ++r)
            empty += sets[p].offset[r + 1] == sets[p].offset[r];
        const double f = static_cast<double>(empty) / static_cast<double>(n_mc);
        cur.values[p] = f;
        cur.std_errors[p] = binomial_std_error(f, n_mc);
    }
    if (trace)
        trace->sweeps.push_back(cur.values);
    const RingLaw& ring = model.ring();
    for (std::size_t sweep = 0; sweep < n_sweeps; ++sweep) {
        FTable next = cur;
        parallel_for(p_max, threads, [&](std::size_t i) {
            const std::uint64_t p = i + 1;
            const GasketSet& g = sets[p];
            RunningStats st;
            for (std::size_t r = 0; r < n_mc; ++r) {
                double prod = 1;
                for (std::size_t j = g.offset[r]; j < g.offset[r + 1] && prod > 0; ++j)
                    prod *= ring.tilted_expectation(g.faces[j], cur);
                st.add(prod);
            }
            next.values[p] = st.mean();
            next.std_errors[p] = st.std_error();
        });
        for (std::uint64_t p = 1; p <= p_max; ++p)
            if (next.values[p] < cur.values[p])
                throw std::logic_error("fixed-point iterate decreased at p = " + std::to_string(p));
        cur = std::move(next);
        if (trace)
            trace->sweeps.push_back(cur.values);
    }
    cur.beyond = 0;
    cur.notes = "lower bound: F(p) = 0 assumed for p > p_max; " + std::to_string(n_sweeps) + " sweeps, " +
                std::to_string(n_mc) + " common gaskets per p";
    return cur;
}

nlohmann::json AlphaReport::to_json() const
{
    return {{"alpha_hat", alpha_hat},
            {"alpha_std_error", alpha_std_error},
            {"subadditive_bracket", subadditive_bracket},
            {"ratios", ratios},
            {"log_c1_all_pairs", log_c1_all},
            {"log_c1_upper_pairs", log_c1_upper},
            {"fit_from", fit_from},
            {"fit_to", fit_to}};
}

AlphaReport estimate_alpha(const FTable& F)
{
    const std::uint64_t pm = F.p_max();
    if (pm < 20)
        throw CoverageError("alpha fit needs the table to reach p >= 20");
    AlphaReport r;
    r.fit_from = (pm + 1) / 2;
    r.fit_to = pm;
    std::vector<double> x, y;
    for (std::uint64_t p = r.fit_from; p <= pm; ++p) {
        if (!(F.at(p) > 0))
            throw DomainError("F vanishes at p = " + std::to_string(p) + " inside the fit range");
        x.push_back(static_cast<double>(p));
        y.push_back(F.h(p));
    }
    const auto fit = least_squares(x, y);
    r.alpha_hat = fit.slope;
    r.alpha_std_error = fit.slope_std_error;
    r.ratios.assign(pm + 1, 0.0);
    r.subadditive_bracket = std::numeric_limits<double>::infinity();
    for (std::uint64_t p = 1; p <= pm; ++p) {
        if (!(F.at(p) > 0))
            continue;
        r.ratios[p] = F.h(p) / static_cast<double>(p);
        r.subadditive_bracket = std::min(r.subadditive_bracket, r.ratios[p]);
    }
    // superadditivity slack: log F(p+q) - log F(p) - log F(q) - log(p+q+1) + 3/2 log(pq)
    r.log_c1_all = r.log_c1_upper = std::numeric_limits<double>::infinity();
    for (std::uint64_t p = 1; p <= pm; ++p)
        for (std::uint64_t q = p; p + q <= pm; ++q) {
            if (!(F.at(p) > 0 && F.at(q) > 0 && F.at(p + q) > 0))
                continue;
            const double d = std::log(F.at(p + q)) - std::log(F.at(p)) - std::log(F.at(q)) -
                             std::log(static_cast<double>(p + q + 1)) +
                             1.5 * (std::log(static_cast<double>(p)) + std::log(static_cast<double>(q)));
            r.log_c1_all = std::min(r.log_c1_all, d);
            if (4 * p >= pm && 4 * q >= pm)
                r.log_c1_upper = std::min(r.log_c1_upper, d);
        }
    return r;
}

ConditionedSampler::ConditionedSampler(const SupermapModel& model, FTable F, const TiltOptions& opt)
    : model_(&model),
      F_(std::move(F)),
      q_(tilt_subcritical(model.weights(), F_, model.ring(), opt)),
      mu_(mu_from_weights(q_)),
      sampler_(mu_)
{
}

CascadeRecord ConditionedSampler::sample(std::uint64_t p, Rng& rng, ConditionMethod method,
                                         std::uint64_t max_attempts) const
{
    const auto& cfg = model_->config();
    if (method == ConditionMethod::rejection) {
        for (std::uint64_t a = 0; a < max_attempts; ++a) {
            auto rec = sample_unconditioned(*model_, p, cfg.max_generations, rng, true);
            if (rec.finite)
                return rec;
        }
        throw FeasibilityError("rejection sampler found no finite map in " + std::to_string(max_attempts) +
                               " attempts at p = " + std::to_string(p) + "; use the tilt method");
    }
    if (!(F_.at(p) > 0))
        throw ConditioningError("F(" + std::to_string(p) + ") = 0 in the table; cannot condition on finiteness");
    auto rec = run_cascade(p, sampler_, model_->ring(), &F_, cfg, cfg.max_generations, rng, true,
                           model_->walk_options());
    return rec;
}

CascadeRecord sample_conditioned_finite(const SupermapModel& model, std::uint64_t p, const FTable& F, Rng& rng,
                                        ConditionMethod method, std::uint64_t max_attempts)
{
    ConditionedSampler cs(model, F);
    return cs.sample(p, rng, method, max_attempts);
}

std::size_t first_generation_faces(const CascadeRecord& r)
{
    std::size_t n = 0;
    for (const auto& f : r.nodes)
        n += f.word.size() == 1;
    return n;
}

std::vector<double> generation_h_sums(const CascadeRecord& r, const FTable& F, std::size_t max_gen)
{
    std::vector<double> s(max_gen, 0.0);
    for (const auto& f : r.nodes) {
        const std::size_t g = f.word.size() - 1;
        if (g < max_gen && f.inner > 0)
            s[g] += F.h(f.inner);
    }
    return s;
}

} // namespace slqg
