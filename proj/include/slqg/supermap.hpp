#pragma once

#include "slqg/ftable.hpp"
#include "slqg/offspring.hpp"
#include "slqg/rings.hpp"
#include "slqg/rng.hpp"
#include "slqg/ulam.hpp"
#include "slqg/walk.hpp"
#include "slqg/weights.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace slqg {

struct ModelConfig {
    double Q = 1.0;
    double c_tail = 0.5;
    std::uint64_t p_max = 8;
    // a run whose next generation carries more active inner perimeter than
    // this is classified infinite
    std::uint64_t perimeter_cap = 10'000'000;
    std::uint32_t max_generations = 1000;
    std::uint64_t step_budget = 1'000'000'000;
    double root_tol = 1e-10;
    RingVariant ring = RingVariant::default_floor;

    void validate() const;
    nlohmann::json to_json() const;
};

class SupermapModel {
public:
    explicit SupermapModel(const ModelConfig& cfg);
    SupermapModel(const ModelConfig& cfg, RingLaw ring);

    const ModelConfig& config() const { return cfg_; }
    const OffspringDistribution& mu() const { return mu_; }
    const WeightSequence& weights() const { return q_; }
    const StepSampler& sampler() const { return sampler_; }
    const RingLaw& ring() const { return ring_; }
    WalkOptions walk_options() const;

private:
    ModelConfig cfg_;
    OffspringDistribution mu_;
    WeightSequence q_;
    StepSampler sampler_;
    RingLaw ring_;
};

struct ActiveFace {
    UlamWord word;
    std::uint64_t inner = 0;
};

struct GenerationState {
    std::uint32_t generation = 0;
    std::vector<ActiveFace> active;

    static GenerationState root(std::uint64_t p);
};

struct CascadeFace {
    UlamWord word;
    std::uint64_t outer = 0;
    std::uint64_t inner = 0;
};

// step_budget: a single gasket walk ran past the step budget, which only
// happens on runs that are growing without bound
enum class Censor { none, perimeter_cap, generation_cap, step_budget };

struct CascadeRecord {
    std::uint64_t p = 0;
    bool finite = false;
    std::uint32_t generations_used = 0;
    std::uint64_t tperm = 0;
    Censor censor = Censor::none;
    std::vector<CascadeFace> nodes;

    nlohmann::json to_json() const;
};

struct GenerationResult {
    GenerationState next;
    std::vector<CascadeFace> faces;
    std::size_t face_count = 0;
    bool blown_up = false;
};

// One induction step: a gasket for every active boundary, then a ring inside
// every gasket face. Children are numbered by decreasing face perimeter.
GenerationResult step_generation(const GenerationState& state, const StepSampler& gasket, const RingLaw& ring, Rng& rng,
                                 const FTable* tilt = nullptr, std::uint64_t perimeter_cap = 10'000'000,
                                 const WalkOptions& walk = {}, bool record_faces = true);

CascadeRecord sample_unconditioned(const SupermapModel& model, std::uint64_t p, std::uint32_t max_generations, Rng& rng,
                                   bool record_nodes = true);

std::uint64_t compute_tperm(const CascadeRecord& r);

FTable estimate_F_monte_carlo(const SupermapModel& model, std::uint64_t p_max, std::size_t n_runs,
                              std::uint32_t max_generations, std::uint64_t seed, unsigned threads = 1);

struct FixedPointTrace {
    std::vector<std::vector<double>> sweeps; // sweeps[n][p]
};

FTable estimate_F_fixed_point(const SupermapModel& model, std::uint64_t p_max, std::size_t n_sweeps,
                              std::size_t n_mc_per_sweep, std::uint64_t seed, unsigned threads = 1,
                              FixedPointTrace* trace = nullptr);

struct AlphaReport {
    double alpha_hat = 0;
    double alpha_std_error = 0;
    double subadditive_bracket = 0; // min_p h(p)/p
    std::vector<double> ratios;     // h(p)/p, index p
    double log_c1_all = 0;          // min over pairs of the superadditivity slack
    double log_c1_upper = 0;        // same, pairs with p, q >= p_max / 4
    std::uint64_t fit_from = 0;
    std::uint64_t fit_to = 0;

    nlohmann::json to_json() const;
};

AlphaReport estimate_alpha(const FTable& F);

enum class ConditionMethod { rejection, tilt };

// Conditioned-to-finite sampler. The tilt method draws every gasket from the
// subcritical law mu_{q'} and every ring from the F-tilted ring law; it is
// exact for the exact F and inherits the bias of an estimated table.
class ConditionedSampler {
public:
    ConditionedSampler(const SupermapModel& model, FTable F, const TiltOptions& opt = {});

    const FTable& F() const { return F_; }
    const WeightSequence& tilted_weights() const { return q_; }
    const OffspringDistribution& tilted_mu() const { return mu_; }
    const StepSampler& tilted_sampler() const { return sampler_; }

    CascadeRecord sample(std::uint64_t p, Rng& rng, ConditionMethod method, std::uint64_t max_attempts = 1'000'000) const;

private:
    const SupermapModel* model_;
    FTable F_;
    WeightSequence q_;
    OffspringDistribution mu_;
    StepSampler sampler_;
};

CascadeRecord sample_conditioned_finite(const SupermapModel& model, std::uint64_t p, const FTable& F, Rng& rng,
                                        ConditionMethod method, std::uint64_t max_attempts = 1'000'000);

// number of faces in the outermost gasket (word length 1)
std::size_t first_generation_faces(const CascadeRecord& r);

// sum of h(per_in) over the faces of M_i, i = 0..max_gen-1
std::vector<double> generation_h_sums(const CascadeRecord& r, const FTable& F, std::size_t max_gen);

} // namespace slqg
