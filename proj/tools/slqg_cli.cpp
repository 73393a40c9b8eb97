#include "slqg/analytic.hpp"
#include "slqg/cascade.hpp"
#include "slqg/errors.hpp"
#include "slqg/ftable.hpp"
#include "slqg/stable.hpp"
#include "slqg/supermap.hpp"
#include "slqg/trees.hpp"
#include "slqg/verify.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <boost/version.hpp>
#include <json.hpp>

using namespace slqg;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitFeasibility = 3;
constexpr int kExitVerify = 4;

struct Options {
    // shared
    double q = 1.0;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string out;
    // theta-star
    double q_min = 0.01, q_max = 1.99;
    int steps = 200;
    // estimate-f / sample supermap
    std::uint64_t p = 4;
    std::uint64_t p_max = 8;
    std::string method;
    std::size_t samples = 0;
    std::size_t sweeps = 12;
    std::uint64_t perimeter_cap = 200;
    std::string ring = "default";
    std::string ring_table;
    double c_tail = 0.5;
    // cascade
    int generations = 3;
    std::size_t children_cap = 10000;
    double eps = 1e-2, delta = 1e-2;
    std::size_t pool = 20000;
    // tree / trunk
    std::size_t size = 2001;
    std::size_t height = 50;
    std::string nu = "binary";
    // verify
    std::string suite = "all";
    double budget = 1.0;
};

std::vector<std::string> g_command_line;

// key=value lines, '#' comments; keys are long option names without dashes
std::map<std::string, std::string> read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw UsageError("cannot read config file " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        const auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos)
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(ln) + " is not key=value");
        auto trim = [](std::string s) {
            const auto x = s.find_first_not_of(" \t\r"), y = s.find_last_not_of(" \t\r");
            return x == std::string::npos ? std::string() : s.substr(x, y - x + 1);
        };
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

// Splices config entries in after the subcommand unless the same option is
// already on the command line, so flags win.
std::vector<std::string> apply_config(std::vector<std::string> args)
{
    std::string path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (path.empty())
        return rest;
    std::set<std::string> given;
    for (const auto& a : rest)
        if (a.rfind("--", 0) == 0)
            given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));
    std::size_t at = 1;
    while (at < rest.size() && rest[at].rfind("-", 0) != 0 && at < 3)
        ++at; // after "prog sub [model]"
    std::vector<std::string> extra;
    for (const auto& [k, v] : read_config(path))
        if (!given.count(k)) {
            extra.push_back("--" + k);
            extra.push_back(v);
        }
    rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(at), extra.begin(), extra.end());
    return rest;
}

struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit Output(const std::string& path)
    {
        if (!path.empty()) {
            file.open(path, std::ios::binary);
            if (!file)
                throw UsageError("cannot open output " + path);
            os = &file;
        }
    }
};

void write_manifest(const Options& o, const json& config, std::uint64_t streams, double wall,
                    const std::vector<std::string>& outputs)
{
    json m;
    m["command_line"] = g_command_line;
    m["config"] = config;
    m["master_seed"] = o.seed;
    m["stream_count"] = streams;
    m["threads"] = o.threads;
    m["versions"] = {{"slqg", "1.0.0"},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"cli11", CLI11_VERSION},
                     {"boost", BOOST_LIB_VERSION}};
    m["outputs"] = outputs;
    m["wall_clock_seconds"] = wall;
    if (o.out.empty()) {
        std::cerr << m.dump(2) << '\n';
        return;
    }
    std::ofstream f(o.out + ".manifest.json", std::ios::binary);
    f << m.dump(2) << '\n';
}

ModelConfig model_config(const Options& o)
{
    ModelConfig c;
    c.Q = o.q;
    c.c_tail = o.c_tail;
    c.p_max = o.p_max;
    c.perimeter_cap = o.perimeter_cap;
    if (o.ring == "default")
        c.ring = RingVariant::default_floor;
    else if (o.ring == "zero-inner")
        c.ring = RingVariant::zero_inner;
    else if (o.ring == "custom")
        c.ring = RingVariant::custom_table;
    else
        throw UsageError("unknown ring variant '" + o.ring + "'");
    return c;
}

SupermapModel make_model(const Options& o)
{
    const ModelConfig c = model_config(o);
    if (c.ring == RingVariant::custom_table) {
        if (o.ring_table.empty())
            throw UsageError("--ring custom needs --ring-table");
        std::ifstream in(o.ring_table);
        if (!in)
            throw UsageError("cannot read ring table " + o.ring_table);
        return SupermapModel(c, RingLaw::custom_from_json(c.Q, json::parse(in)));
    }
    return SupermapModel(c);
}

OffspringDistribution make_nu(const std::string& name)
{
    if (name == "binary")
        return OffspringDistribution({0.5, 0.0, 0.5});
    if (name == "geometric")
        return make_geometric(0.5);
    throw UsageError("unknown offspring law '" + name + "' (binary, geometric)");
}

int cmd_theta_star(const Options& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    const auto grid = uniform_q_grid(o.q_min, o.q_max, o.steps);
    const auto rows = figure_theta_star(grid);
    {
        Output out(o.out);
        write_figure_csv(*out.os, rows);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(o, {{"q_min", o.q_min}, {"q_max", o.q_max}, {"steps", o.steps}}, 0, wall, {o.out});
    return kExitOk;
}

int cmd_estimate_f(const Options& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    const SupermapModel model = make_model(o);
    const std::string method = o.method.empty() ? "fixed-point" : o.method;
    FTable F;
    std::uint64_t streams = 0;
    if (method == "monte-carlo") {
        const std::size_t n = o.samples ? o.samples : 100000;
        F = estimate_F_monte_carlo(model, o.p_max, n, model.config().max_generations, o.seed, o.threads);
        streams = n * o.p_max;
    } else if (method == "fixed-point") {
        const std::size_t n = o.samples ? o.samples : 10000;
        F = estimate_F_fixed_point(model, o.p_max, o.sweeps, n, o.seed, o.threads);
        streams = n * o.p_max;
    } else {
        throw UsageError("unknown method '" + method + "' (monte-carlo, fixed-point)");
    }
    {
        Output out(o.out);
        F.write_csv(*out.os);
    }
    json cfg = model.config().to_json();
    cfg["method"] = method;
    cfg["samples"] = o.samples;
    cfg["sweeps"] = o.sweeps;
    cfg["table_notes"] = F.notes;
    std::vector<std::string> outs{o.out};
    if (o.p_max >= 20) {
        json a;
        try {
            a = estimate_alpha(F).to_json();
        } catch (const DomainError& e) {
            a = {{"error", e.what()}};
        }
        cfg["alpha"] = a;
        if (!o.out.empty()) {
            std::ofstream f(o.out + ".alpha.json", std::ios::binary);
            f << a.dump(2) << '\n';
            outs.push_back(o.out + ".alpha.json");
        }
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(o, cfg, streams, wall, outs);
    if (method == "monte-carlo")
        for (std::uint64_t p = 1; p <= F.p_max(); ++p)
            if (F.values[p] == 0) {
                std::cerr << "advisory: no finite runs at p = " << p
                          << "; the rejection regime is infeasible here, use --method fixed-point\n";
                return kExitFeasibility;
            }
    return kExitOk;
}

int cmd_sample(const std::string& model_name, const Options& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = o.samples ? o.samples : 1;
    json cfg;
    cfg["model"] = model_name;
    cfg["samples"] = n;
    Output out(o.out);
    std::uint64_t streams = n;
    if (model_name == "supermap") {
        const SupermapModel model = make_model(o);
        const std::string method = o.method.empty() ? "unconditioned" : o.method;
        cfg["config"] = model.config().to_json();
        cfg["method"] = method;
        cfg["p"] = o.p;
        std::optional<ConditionedSampler> cs;
        if (method == "tilt" || method == "rejection") {
            const std::uint64_t pm = std::max<std::uint64_t>(o.p_max, o.p);
            cs.emplace(model, estimate_F_fixed_point(model, pm, o.sweeps, 10000, o.seed ^ 0x5eed, o.threads));
            cfg["f_table_p_max"] = pm;
        } else if (method != "unconditioned") {
            throw UsageError("unknown method '" + method + "' (unconditioned, rejection, tilt)");
        }
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = make_stream(o.seed, i);
            CascadeRecord r;
            if (!cs)
                r = sample_unconditioned(model, o.p, model.config().max_generations, rng, true);
            else
                r = cs->sample(o.p, rng, method == "tilt" ? ConditionMethod::tilt : ConditionMethod::rejection);
            *out.os << r.to_json().dump() << '\n';
        }
    } else if (model_name == "cascade") {
        StableOptions so;
        so.eps = o.eps;
        so.delta = o.delta;
        const auto pool = Rho1Pool::sample(so, o.pool, o.seed ^ 0x9001, o.threads);
        cfg["Q"] = o.q;
        cfg["generations"] = o.generations;
        cfg["children_cap"] = o.children_cap;
        cfg["eps"] = o.eps;
        cfg["delta"] = o.delta;
        cfg["pool"] = o.pool;
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = make_stream(o.seed, i);
            const CascadeTree t = sample_cascade(pool, o.q, o.generations, o.children_cap, rng);
            t.write_jsonl(*out.os, n > 1 ? static_cast<long>(i) : -1);
        }
        streams += o.pool;
    } else if (model_name == "tree") {
        const OffspringDistribution nu = make_nu(o.nu);
        cfg["nu"] = o.nu;
        cfg["size"] = o.size;
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = make_stream(o.seed, i);
            const PlaneTree t = sample_conditioned_bgw(nu, o.size, rng);
            *out.os << json{{"size", t.size()}, {"height", t.height()}, {"newick", t.newick()}}.dump() << '\n';
        }
    } else if (model_name == "trunk") {
        const OffspringDistribution nu_star = size_bias(make_nu(o.nu));
        cfg["nu"] = o.nu;
        cfg["height"] = o.height;
        for (std::size_t i = 0; i < n; ++i) {
            Rng rng = make_stream(o.seed, i);
            const TrunkSample s = sample_trunk_star(nu_star, o.height, rng);
            *out.os << json{{"h", o.height},
                            {"spine", s.spine},
                            {"spine_children", s.spine_children},
                            {"spine_rank", s.spine_rank},
                            {"newick", s.tree.newick()}}
                           .dump()
                    << '\n';
        }
    } else {
        throw UsageError("unknown model '" + model_name + "' (supermap, cascade, tree, trunk)");
    }
    out.os->flush();
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(o, cfg, streams, wall, {o.out});
    return kExitOk;
}

int cmd_verify(const Options& o)
{
    const auto t0 = std::chrono::steady_clock::now();
    VerifyOptions vo;
    vo.budget = o.budget;
    vo.seed = o.seed;
    vo.threads = o.threads;
    const auto res = run_suite(o.suite, vo);
    const json rep = verify_report(o.suite, vo, res);
    {
        Output out(o.out);
        *out.os << rep.dump(2) << '\n';
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_manifest(o, {{"suite", o.suite}, {"budget", o.budget}}, 0, wall, {o.out});
    return any_failed(res) ? kExitVerify : kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv, argv + argc);
    g_command_line = args;
    Options o;
    CLI::App app{"slqg: perimeter cascades, supercritical maps and boundary trees"};
    app.require_subcommand(1);

    auto shared = [&](CLI::App* s) {
        s->add_option("--seed", o.seed, "master seed");
        s->add_option("--threads", o.threads, "worker threads (0 = all cores); results do not depend on it");
        s->add_option("--out", o.out, "output file (default stdout)");
    };
    auto model_opts = [&](CLI::App* s) {
        s->add_option("--q", o.q, "Q in (0, 2]");
        s->add_option("--p-max", o.p_max, "largest tabulated half-perimeter");
        s->add_option("--perimeter-cap", o.perimeter_cap, "active perimeter at which a run counts as infinite");
        s->add_option("--c-tail", o.c_tail, "tail constant of the critical step law");
        s->add_option("--ring", o.ring, "default, zero-inner or custom");
        s->add_option("--ring-table", o.ring_table, "JSON ring table for --ring custom");
        s->add_option("--sweeps", o.sweeps, "fixed-point sweeps");
    };

    auto* ts = app.add_subcommand("theta-star", "tabulate theta* and mu_Q over a Q grid");
    ts->add_option("--q-min", o.q_min);
    ts->add_option("--q-max", o.q_max);
    ts->add_option("--steps", o.steps);
    shared(ts);

    auto* ef = app.add_subcommand("estimate-f", "estimate F(p) = P(map with boundary 2p is finite)");
    model_opts(ef);
    ef->add_option("--method", o.method, "monte-carlo or fixed-point");
    ef->add_option("--samples", o.samples, "runs per p (MC) or gaskets per p and sweep (fixed point)");
    shared(ef);

    auto* sm = app.add_subcommand("sample", "emit samples as JSON lines");
    std::string model_name;
    sm->add_option("model", model_name, "supermap, cascade, tree or trunk")->required();
    model_opts(sm);
    sm->add_option("--p", o.p, "root half-perimeter (supermap)");
    sm->add_option("--method", o.method, "unconditioned, rejection or tilt (supermap)");
    sm->add_option("--samples", o.samples, "number of records");
    sm->add_option("--generations", o.generations, "cascade depth");
    sm->add_option("--children-cap", o.children_cap, "children kept per cascade node");
    sm->add_option("--eps", o.eps, "stable jump cutoff");
    sm->add_option("--delta", o.delta, "stable reporting threshold");
    sm->add_option("--pool", o.pool, "excursions in the resampling pool");
    sm->add_option("--size", o.size, "tree vertex count");
    sm->add_option("--height", o.height, "trunk height");
    sm->add_option("--nu", o.nu, "binary or geometric offspring law");
    shared(sm);

    auto* vf = app.add_subcommand("verify", "run a verification suite");
    vf->add_option("--suite", o.suite, "analytic, biggins-mc, stable-laplace, f-estimators, conditioned, "
                                       "walk-scaling, crt, combinatorial or all");
    vf->add_option("--budget", o.budget, "sample-size multiplier; below 1 checks report insufficient power");
    shared(vf);

    try {
        std::vector<std::string> eff = apply_config(args);
        std::vector<char*> cargv;
        for (auto& s : eff)
            cargv.push_back(s.data());
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (*ts)
            return cmd_theta_star(o);
        if (*ef)
            return cmd_estimate_f(o);
        if (*sm)
            return cmd_sample(model_name, o);
        if (*vf)
            return cmd_verify(o);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const FeasibilityError& e) {
        std::cerr << "advisory: " << e.what() << "; consider --method tilt or --method fixed-point\n";
        return kExitFeasibility;
    } catch (const DomainError& e) {
        std::cerr << "invalid parameters: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ParityError& e) {
        std::cerr << "invalid parameters: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return kExitUsage;
}
