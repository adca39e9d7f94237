#pragma once

// Command-line driver. Exit codes: 0 success, 1 negative mathematical
// verdict, 2 usage or parameter error, 3 internal failure.

#include "patternsieve/admissible.hpp"
#include "patternsieve/empirical_sums.hpp"
#include "patternsieve/io/config.hpp"
#include "patternsieve/io/report.hpp"
#include "patternsieve/pattern_scanner.hpp"
#include "patternsieve/sieve_weights.hpp"
#include "patternsieve/variational/optimize.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace patternsieve::cli {

using io::Json;
using io::Report;
using io::RunConfig;

enum ExitCode : int { kOk = 0, kNegative = 1, kUsage = 2, kInternal = 3 };

struct Outcome {
    Report report;
    int code = kOk;
};

namespace detail {

inline Exec exec_of(const RunConfig& cfg) { return Exec{cfg.threads}; }

inline AdmissibleTuple tuple_of(const RunConfig& cfg) {
    if (cfg.k != 0 && cfg.k != cfg.tuple.size())
        throw std::domain_error("k = " + std::to_string(cfg.k) + " does not match the tuple size " +
                                std::to_string(cfg.tuple.size()));
    return AdmissibleTuple::from_unsorted(cfg.tuple);
}

inline SieveParams params_of(const RunConfig& cfg, u64 N) {
    AdmissibleTuple H = tuple_of(cfg);
    return build_params(static_cast<unsigned>(H.size()), H, N, cfg.theta, cfg.epsilon, cfg.D0, cfg.c1);
}

inline Json params_json(const SieveParams& p) {
    return Json{{"k", p.k},
                {"tuple", io::offsets_json(p.H.offsets())},
                {"N", p.N},
                {"theta", to_fraction_string(p.theta)},
                {"epsilon", to_fraction_string(p.epsilon)},
                {"R", p.R},
                {"R_bound", p.R_bound},
                {"log_R", p.log_R},
                {"D0", p.D0},
                {"W", p.W},
                {"nu0", p.nu0},
                {"c1", to_fraction_string(p.c1)}};
}

inline Json s1p_json(const S1pRecord& r) {
    return Json{{"p", r.p},          {"S1p", r.S1p},     {"S1", r.S1},
                {"bound", r.bound},  {"ratio", r.ratio}, {"in_c1_range", r.in_c1_range}};
}

inline Json sum_report_json(const SumReport& r) {
    Json j = Json::object();
    j["params"] = params_json(r.params);
    j["window"] = Json{{"lo", r.window.lo}, {"hi", r.window.hi}};
    j["terms"] = r.terms;
    j["rough_terms"] = r.rough_terms;
    j["S1"] = r.S1;
    j["S2"] = r.S2;
    j["S1_minus"] = r.S1_minus;
    j["S1_plus"] = r.S1_plus;
    j["S2_plus"] = r.S2_plus;
    j["S1_star"] = r.S1_star;
    j["r_k"] = r.r_k;
    j["index"] = r.index;
    j["partition_exact"] = r.partition_exact();
    j["S1_exact"] = to_fraction_string(r.S1_exact);
    j["S1_minus_exact"] = to_fraction_string(r.S1_minus_exact);
    j["S1_plus_exact"] = to_fraction_string(r.S1_plus_exact);
    j["S2_over_S1"] = r.S2_over_S1();
    if (r.predicted_S1 && r.predicted_S2) {
        const double predicted_ratio = *r.predicted_S2 / *r.predicted_S1;
        j["predicted"] = Json{{"S1", *r.predicted_S1},
                              {"S2", *r.predicted_S2},
                              {"S2_over_S1", predicted_ratio},
                              {"convention", "S2 main term carries the factor 1/log N"}};
        j["main_term_ratio"] = r.S2_over_S1() / predicted_ratio;
    } else {
        j["predicted"] = nullptr;
    }
    j["s1_minus_constant"] = r.s1_minus_constant();
    return j;
}

template <typename Fn>
auto with_context(const RunConfig& cfg, const SieveParams& params, Fn&& fn) {
    PolyF F = weight_function(params.k, cfg.F_degree);
    if (cfg.exact) return fn(WeightContext<Rational>(params, std::move(F)));
    return fn(WeightContext<double>(params, std::move(F)));
}

inline SumOptions sum_options(const RunConfig& cfg) {
    SumOptions o;
    o.exec = exec_of(cfg);
    o.r_k = cfg.r_k;
    o.index = cfg.index;
    if (cfg.r_k < 1) throw std::domain_error("r_k must be at least 1");
    return o;
}

inline Window window_of(const RunConfig& cfg) {
    if (cfg.lo == 0 && cfg.hi == 0) return Window::dyadic(cfg.N);
    if (cfg.hi <= cfg.lo) throw std::domain_error("window requires lo < hi");
    return {cfg.lo, cfg.hi};
}

inline std::vector<u64> lemma2_primes(u64 D0, unsigned count) {
    std::vector<u64> out;
    for (u64 p = D0 + 1; out.size() < count; ++p)
        if (is_prime(p)) out.push_back(p);
    return out;
}

// ----------------------------------------------------------------- admissible

inline Outcome admissible_check(const RunConfig& cfg) {
    Verdict v = check_admissible(cfg.tuple);
    Outcome o;
    o.report.summary["tuple"] = io::offsets_json(cfg.tuple);
    o.report.summary["k"] = cfg.tuple.size();
    o.report.summary["admissible"] = v.admissible;
    o.report.summary["witness_prime"] = v.witness_prime ? Json(*v.witness_prime) : Json(nullptr);
    o.code = v.admissible ? kOk : kNegative;
    return o;
}

inline Outcome admissible_find(const RunConfig& cfg) {
    const unsigned k = cfg.resolved_k();
    const auto strategy =
        cfg.strategy == "exhaustive" ? TupleStrategy::exhaustive_min_diameter : TupleStrategy::greedy_sieve;
    auto found = find_admissible(k, strategy, cfg.h_cap);
    Outcome o;
    o.report.summary["k"] = k;
    o.report.summary["strategy"] = cfg.strategy;
    o.report.summary["h_cap"] = cfg.h_cap;
    o.report.summary["found"] = found.has_value();
    if (found) {
        o.report.summary["tuple"] = io::offsets_json(found->offsets());
        o.report.summary["diameter"] = found->offsets().back() - found->offsets().front();
    } else {
        o.code = kNegative;
    }
    return o;
}

inline Outcome admissible_subset(const RunConfig& cfg) {
    AdmissibleTuple H = tuple_of(cfg);
    AdmissibleTuple sub = minimal_diameter_subset(H, cfg.m);
    Outcome o;
    o.report.summary["tuple"] = io::offsets_json(H.offsets());
    o.report.summary["m"] = cfg.m;
    o.report.summary["subset"] = io::offsets_json(sub.offsets());
    o.report.summary["diameter"] = sub.offsets().back() - sub.offsets().front();
    o.report.summary["subset_admissible"] = sub.admissible();
    return o;
}

// ------------------------------------------------------------------------- mk

inline Outcome mk_optimize(const RunConfig& cfg) {
    const unsigned k = cfg.resolved_k();
    OptimizeOptions opt;
    opt.precision_bits = cfg.precision;
    opt.denominator_cap = cfg.denominator_cap;
    opt.exec = exec_of(cfg);
    if (cfg.precision < 64) throw std::domain_error("precision must be at least 64 bits");
    if (cfg.denominator_cap < 1) throw std::domain_error("denominator cap must be positive");
    BasisSpec basis{cfg.degree, cfg.max_power_sum};
    VariationalResult res = optimize_Mk(k, basis, cfg.theta, opt);
    Outcome o;
    auto& s = o.report.summary;
    s["k"] = k;
    s["theta"] = to_fraction_string(cfg.theta);
    s["basis"] = basis.describe();
    s["basis_size"] = res.basis_terms.size();
    s["M_lower"] = io::rational_json(res.M_lower);
    s["r_k"] = res.r_k;
    s["eigenvalue"] = res.eigenvalue;
    s["residual"] = res.residual;
    o.report.row_kind = "coefficient";
    for (std::size_t i = 0; i < res.basis_terms.size(); ++i) {
        const auto& key = res.basis_terms[i];
        o.report.rows.push_back(Json{{"index", i},
                                     {"one_minus_P1", key.one_minus},
                                     {"power_sums", key.sums},
                                     {"coefficient", to_fraction_string(res.coefficients[i])}});
    }
    return o;
}

// ----------------------------------------------------------------------- sums

inline Outcome sums_run(const RunConfig& cfg) {
    const SieveParams params = params_of(cfg, cfg.N);
    SumOptions opt = sum_options(cfg);
    const Window window = window_of(cfg);
    SumReport rep = with_context(cfg, params, [&](const auto& ctx) { return measure_window(ctx, window, opt); });
    Outcome o;
    o.report.summary = sum_report_json(rep);
    o.report.summary["exact_weights"] = cfg.exact;
    return o;
}

inline Outcome sums_lemma1(const RunConfig& cfg) {
    const SieveParams params = params_of(cfg, cfg.N);
    SumOptions opt = sum_options(cfg);
    const Window first = window_of(cfg);
    const Window second{first.hi, first.hi + 2 * first.length()};
    auto reports = with_context(cfg, params, [&](const auto& ctx) {
        return std::pair{measure_window(ctx, first, opt), measure_window(ctx, second, opt)};
    });
    const double c_a = reports.first.s1_minus_constant();
    const double c_b = reports.second.s1_minus_constant();
    const bool degenerate = c_a == 0 && c_b == 0;
    const double spread = degenerate ? 1.0 : (c_a > 0 && c_b > 0 ? std::max(c_a, c_b) / std::min(c_a, c_b) : INFINITY);
    const bool exact = reports.first.partition_exact() && reports.second.partition_exact();
    const bool stable = spread <= 1.5;
    Outcome o;
    auto& s = o.report.summary;
    s["params"] = params_json(params);
    s["windows"] = Json::array({Json{{"lo", first.lo},
                                     {"hi", first.hi},
                                     {"S1", reports.first.S1},
                                     {"S1_minus", reports.first.S1_minus},
                                     {"S1_plus", reports.first.S1_plus},
                                     {"partition_exact", reports.first.partition_exact()},
                                     {"constant", c_a}},
                                Json{{"lo", second.lo},
                                     {"hi", second.hi},
                                     {"S1", reports.second.S1},
                                     {"S1_minus", reports.second.S1_minus},
                                     {"S1_plus", reports.second.S1_plus},
                                     {"partition_exact", reports.second.partition_exact()},
                                     {"constant", c_b}}});
    s["spread"] = std::isfinite(spread) ? Json(spread) : Json(nullptr);
    s["degenerate"] = degenerate;
    s["partition_exact"] = exact;
    s["stable"] = stable;
    o.code = exact && stable ? kOk : kNegative;
    return o;
}

inline Outcome sums_lemma2(const RunConfig& cfg) {
    const SieveParams params = params_of(cfg, cfg.N);
    SumOptions opt = sum_options(cfg);
    opt.primes = lemma2_primes(params.D0, cfg.primes);
    const Window window = window_of(cfg);
    SumReport rep = with_context(cfg, params, [&](const auto& ctx) { return measure_window(ctx, window, opt); });
    constexpr double kBudget = 4.0;
    double worst = 0;
    for (const auto& r : rep.s1p) worst = std::max(worst, r.ratio);
    Outcome o;
    auto& s = o.report.summary;
    s["params"] = params_json(params);
    s["window"] = Json{{"lo", window.lo}, {"hi", window.hi}};
    s["index"] = cfg.index;
    s["S1"] = rep.S1;
    s["budget"] = kBudget;
    s["max_ratio"] = worst;
    s["within_budget"] = worst <= kBudget;
    o.report.row_kind = "s1p";
    for (const auto& r : rep.s1p) o.report.rows.push_back(s1p_json(r));
    o.code = worst <= kBudget ? kOk : kNegative;
    return o;
}

inline Outcome sums_tp_identity(const RunConfig& cfg) {
    const SieveParams params = with_integer_R(params_of(cfg, cfg.N), cfg.R);
    WeightContext<Rational> ctx(params, weight_function(params.k, cfg.F_degree));
    Outcome o;
    auto& s = o.report.summary;
    s["params"] = params_json(params);
    s["support_size"] = ctx.support().size();
    auto [lhs, rhs] = selberg_quadratic_form(ctx);
    bool all_equal = lhs == rhs;
    s["selberg"] = Json{{"lhs", to_fraction_string(lhs)}, {"rhs", to_fraction_string(rhs)}, {"equal", lhs == rhs}};
    o.report.row_kind = "tp";
    for (u64 p = params.D0 + 1; p < params.R_bound; ++p) {
        if (!is_prime(p)) continue;
        auto [tl, tr] = tp_quadratic_form(p, ctx);
        all_equal = all_equal && tl == tr;
        o.report.rows.push_back(
            Json{{"p", p}, {"lhs", to_fraction_string(tl)}, {"rhs", to_fraction_string(tr)}, {"equal", tl == tr}});
    }
    s["primes_checked"] = o.report.rows.size();
    s["all_equal"] = all_equal;
    o.code = all_equal ? kOk : kNegative;
    return o;
}

// ----------------------------------------------------------------------- scan

inline Json hit_json(const PatternHit& h) {
    return Json{{"n", h.n},
                {"subset", h.subset},
                {"all_prime", h.all_prime},
                {"consecutive", h.consecutive},
                {"rough", h.rough ? Json(*h.rough) : Json(nullptr)}};
}

inline Json witness_json(const APWitness& w) {
    return Json{{"start", w.start}, {"d", w.d}, {"length", w.length}, {"members", w.members}, {"pattern", w.pattern}};
}

inline Outcome scan_rough_cmd(const RunConfig& cfg) {
    const SieveParams params = params_of(cfg, cfg.X);
    RoughScan scan = scan_rough(params, cfg.X, 20, exec_of(cfg));
    Outcome o;
    auto& s = o.report.summary;
    s["tuple"] = io::offsets_json(params.H.offsets());
    s["X"] = scan.X;
    s["W"] = params.W;
    s["nu0"] = params.nu0;
    s["c1"] = to_fraction_string(params.c1);
    s["count"] = scan.count;
    s["normalized"] = scan.normalized;
    s["samples"] = scan.samples;
    return o;
}

inline Outcome scan_hits_cmd(const RunConfig& cfg, bool rough_flag) {
    HitOptions opt;
    opt.require_consecutive = cfg.consecutive;
    opt.exclusion = cfg.exclude;
    opt.exec = exec_of(cfg);
    if (rough_flag) opt.rough = RoughSpec{AdmissibleTuple::from_unsorted(cfg.tuple).offsets(), cfg.c1};
    const u64 lo = cfg.lo;
    const u64 hi = cfg.hi == 0 ? cfg.X : cfg.hi;
    auto hits = find_pattern_hits(cfg.pattern, lo, hi, opt);
    Outcome o;
    auto& s = o.report.summary;
    s["pattern"] = cfg.pattern;
    s["lo"] = lo;
    s["hi"] = hi;
    s["consecutive"] = cfg.consecutive;
    s["exclude"] = cfg.exclude;
    s["count"] = hits.size();
    o.report.row_kind = "hit";
    for (const auto& h : hits) o.report.rows.push_back(hit_json(h));
    return o;
}

inline Outcome scan_aps_cmd(const RunConfig& cfg) {
    APSearch res = find_pattern_APs(cfg.pattern, cfg.ell, cfg.X, cfg.consecutive, exec_of(cfg));
    Outcome o;
    auto& s = o.report.summary;
    s["pattern"] = cfg.pattern;
    s["ell"] = cfg.ell;
    s["X"] = cfg.X;
    s["consecutive"] = cfg.consecutive;
    s["hits"] = res.hits;
    s["total"] = res.total;
    s["emitted"] = res.witnesses.size();
    s["truncated"] = res.truncated();
    o.report.row_kind = "witness";
    for (const auto& w : res.witnesses) o.report.rows.push_back(witness_json(w));
    return o;
}

inline Outcome scan_subsets_cmd(const RunConfig& cfg) {
    SubsetCount res = count_pattern_subsets(cfg.A, cfg.m, cfg.ell, cfg.X, exec_of(cfg));
    Outcome o;
    auto& s = o.report.summary;
    s["A"] = cfg.A;
    s["m"] = cfg.m;
    s["ell"] = cfg.ell;
    s["X"] = cfg.X;
    s["subsets"] = res.subsets;
    s["witnessed"] = res.witnessed;
    s["note"] = "witnessed up to X";
    o.report.row_kind = "subset";
    for (const auto& w : res.witnesses)
        o.report.rows.push_back(Json{{"subset", w.subset}, {"pattern", w.pattern}, {"witness", witness_json(w.first)}});
    return o;
}

struct Command {
    std::string group;
    std::string name;
    std::string help;
    std::vector<std::string> keys;  // config keys exposed as flags
    std::function<Outcome(const RunConfig&, const std::map<std::string, std::string>&)> run;
};

inline const std::vector<std::string> kSieveKeys = {"tuple", "k", "N", "theta", "epsilon", "D0", "c1", "F_degree",
                                                    "exact", "lo", "hi", "r_k", "index"};

inline std::vector<std::string> plus(std::vector<std::string> a, const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

inline std::vector<Command> commands() {
    auto simple = [](Outcome (*fn)(const RunConfig&)) {
        return [fn](const RunConfig& c, const std::map<std::string, std::string>&) { return fn(c); };
    };
    return {
        {"admissible", "check", "verify admissibility of a tuple", {"tuple"}, simple(admissible_check)},
        {"admissible", "find", "construct an admissible k-tuple", {"k", "strategy", "h_cap"}, simple(admissible_find)},
        {"admissible", "subset", "minimal-diameter m-subset of a tuple", {"tuple", "k", "m"}, simple(admissible_subset)},
        {"mk", "optimize", "certified lower bound for M_k",
         {"k", "degree", "max_power_sum", "theta", "precision", "denominator_cap"}, simple(mk_optimize)},
        {"sums", "run", "measure S1, S2 and their refinements over a window", kSieveKeys, simple(sums_run)},
        {"sums", "lemma1", "S1- share across two dyadic windows", kSieveKeys, simple(sums_lemma1)},
        {"sums", "lemma2", "S1,p against log p / (p log R) * S1", plus(kSieveKeys, {"primes"}), simple(sums_lemma2)},
        {"sums", "tp-identity", "exact quadratic-form identities at small integer R",
         {"tuple", "k", "N", "theta", "epsilon", "D0", "c1", "F_degree", "R"}, simple(sums_tp_identity)},
        {"scan", "rough", "count rough translates up to X", {"tuple", "k", "theta", "epsilon", "D0", "c1", "X"},
         simple(scan_rough_cmd)},
        {"scan", "hits", "prime-pattern hits in [lo, hi]",
         {"pattern", "lo", "hi", "X", "consecutive", "exclude", "tuple", "c1"},
         [](const RunConfig& c, const std::map<std::string, std::string>& given) {
             return scan_hits_cmd(c, given.contains("tuple"));
         }},
        {"scan", "aps", "arithmetic progressions of pattern hits", {"pattern", "ell", "X", "consecutive"},
         simple(scan_aps_cmd)},
        {"scan", "subsets", "m-subsets of A with progression witnesses", {"A", "m", "ell", "X"},
         simple(scan_subsets_cmd)},
    };
}

inline std::string flag_name(const std::string& key) {
    std::string f = "--";
    for (char c : key) f += c == '_' ? '-' : c;
    return f;
}

inline bool is_boolean_key(const std::string& key) { return key == "exact" || key == "consecutive"; }

}  // namespace detail

/// Parses arguments, runs the selected command and writes its report.
inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"patternsieve: admissible tuples, sieve weights, M_k bounds and prime-pattern scans"};
    app.name(args.empty() ? "patternsieve" : args.front());
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, format, output;
    unsigned threads = 0;
    bool no_timestamp = false;
    auto* config_opt = app.add_option("--config", config_path, "key=value config file (default: $PATTERNSIEVE_CONFIG)");
    auto* format_opt = app.add_option("--format", format, "json, jsonl or csv");
    auto* output_opt = app.add_option("--output", output, "write the report here instead of stdout");
    auto* threads_opt = app.add_option("--threads", threads, "worker cap (default: all cores)");
    app.add_flag("--no-timestamp", no_timestamp, "omit generated_at from reports");

    const auto cmds = detail::commands();
    std::map<std::string, CLI::App*> groups;
    struct Leaf {
        CLI::App* app;
        const detail::Command* cmd;
        std::map<std::string, CLI::Option*> options;
    };
    std::vector<Leaf> leaves;
    std::map<std::string, std::string> raw;  // key -> value storage shared by all leaves
    std::map<std::string, bool> raw_flags;
    for (const auto& key : io::config_keys()) {
        raw[key];
        raw_flags[key];
    }
    for (const auto& cmd : cmds) {
        auto& group = groups[cmd.group];
        if (!group) {
            group = app.add_subcommand(cmd.group, cmd.group + " commands");
            group->require_subcommand(1);
            group->fallthrough();
        }
        Leaf leaf{group->add_subcommand(cmd.name, cmd.help), &cmd, {}};
        leaf.app->fallthrough();
        for (const auto& key : cmd.keys) {
            if (detail::is_boolean_key(key))
                leaf.options[key] = leaf.app->add_flag(detail::flag_name(key), raw_flags[key]);
            else
                leaf.options[key] = leaf.app->add_option(detail::flag_name(key), raw[key]);
        }
        leaves.push_back(std::move(leaf));
    }

    std::vector<std::string> argv_rest(args.begin() + (args.empty() ? 0 : 1), args.end());
    std::reverse(argv_rest.begin(), argv_rest.end());
    try {
        app.parse(argv_rest);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    const Leaf* chosen = nullptr;
    for (const auto& leaf : leaves)
        if (leaf.app->parsed()) chosen = &leaf;
    if (!chosen) {
        err << "error: no command selected\n";
        return kUsage;
    }

    RunConfig cfg;
    std::map<std::string, std::string> given;
    try {
        if (config_opt->count() == 0)
            if (const char* env = std::getenv("PATTERNSIEVE_CONFIG"); env && *env) config_path = env;
        if (!config_path.empty()) cfg = io::apply_kv(cfg, io::read_config_file(config_path));
        for (const auto& [key, opt] : chosen->options) {
            if (opt->count() == 0) continue;
            given[key] = detail::is_boolean_key(key) ? "true" : raw[key];
            io::set_value(cfg, key, given[key]);
        }
        if (format_opt->count()) io::set_value(cfg, "format", format);
        if (output_opt->count()) cfg.output = output;
        if (threads_opt->count()) cfg.threads = threads;
        if (no_timestamp) cfg.timestamp = false;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    }

    Outcome outcome;
    try {
        outcome = chosen->cmd->run(cfg, given);
    } catch (const std::logic_error& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << "\n";
        return kInternal;
    }
    outcome.report.command = chosen->cmd->group + " " + chosen->cmd->name;
    const std::string text = io::render(outcome.report, cfg);
    if (cfg.output.empty()) {
        out << text;
    } else {
        std::ofstream f(cfg.output, std::ios::binary);
        if (!f || !(f << text)) {
            err << "error: cannot write '" << cfg.output << "'\n";
            return kInternal;
        }
    }
    return outcome.code;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace patternsieve::cli
