// Acceptance run: one PASS/FAIL line per criterion, plus "info" lines with
// the measured numbers. `--expect-fail 6,...` marks criteria whose failure is
// documented; the exit status is 0 when every criterion behaves as expected.

#include "patternsieve/cli.hpp"
#include "patternsieve/patternsieve.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

using namespace patternsieve;
using io::Json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct CliRun {
    int code;
    std::string out, err;
};

CliRun cli_run(std::vector<std::string> args) {
    args.insert(args.begin(), "patternsieve");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

Json cli_json(std::vector<std::string> args) {
    args.push_back("--no-timestamp");
    auto r = cli_run(args);
    if (r.code != 0 && r.code != 1) throw std::runtime_error("cli exit " + std::to_string(r.code) + ": " + r.err);
    return Json::parse(r.out);
}

void info(const std::string& s) { std::cout << "    info: " << s << "\n"; }

std::string fmt(double x, int prec = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    return buf;
}

// ------------------------------------------------------------------ 1

bool criterion_mk() {
    const auto t0 = Clock::now();
    Json j = cli_json({"mk", "optimize", "--k", "105", "--degree", "3"});
    const double secs = seconds_since(t0);
    const Rational M = parse_rational(j["M_lower"]["fraction"].get<std::string>());
    const auto rk = j["r_k"].get<unsigned>();
    info("M_105 >= " + j["M_lower"]["decimal"].get<std::string>().substr(0, 12) + ", basis " +
         std::to_string(j["basis_size"].get<unsigned>()) + " terms, r_k = " + std::to_string(rk) + ", " +
         fmt(secs, 3) + " s");
    return M > 4 && rk == 2 && secs < 600;
}

// ------------------------------------------------------------------ 2

// F = a + b (1 - P1) + c P2, evaluated by hand so the sampler shares no code
// with the exact integrals.
struct SimpleF {
    unsigned k;
    double a, b, c;
    double operator()(const std::vector<double>& x) const {
        double p1 = 0, p2 = 0;
        for (double v : x) p1 += v, p2 += v * v;
        return a + b * (1 - p1) + c * p2;
    }
    PolyF exact() const {
        PolyF one = PolyF::constant(k, Rational(1));
        PolyF p1(k), p2(k);
        for (unsigned i = 0; i < k; ++i) {
            p1 = p1 + PolyF::coordinate(k, i);
            p2 = p2 + PolyF::coordinate(k, i) * PolyF::coordinate(k, i);
        }
        return Rational(a) * one + Rational(b) * (one + Rational(-1) * p1) + Rational(c) * p2;
    }
};

bool criterion_integrals() {
    bool ok = true;
    for (unsigned k = 1; k <= 10; ++k) {
        auto r = optimize_Mk(k, BasisSpec{0, 3}, Rational(1, 2));
        if (r.M_lower != make_rational(2 * k, k + 1)) {
            ok = false;
            info("constant basis k=" + std::to_string(k) + " gave " + to_fraction_string(r.M_lower));
        }
    }
    info("constant basis: M = 2k/(k+1) exactly for k = 1..10: " + std::string(ok ? "yes" : "no"));

    std::mt19937_64 rng(20240601);
    std::uniform_int_distribution<int> coef(-4, 4);
    constexpr long kSamples = 10'000'000;
    double worst = 0;
    for (int c = 0; c < 20; ++c) {
        SimpleF f{1 + static_cast<unsigned>(c % 5), 1.0 + std::abs(coef(rng)), double(coef(rng)) / 2, double(coef(rng)) / 2};
        const PolyF F = f.exact();
        const double I = compute_I(F).get_d();
        const double J = compute_Jj(F, f.k - 1).get_d();
        const double vol_k = 1 / std::tgamma(f.k + 1.0), vol_km1 = 1 / std::tgamma(double(f.k));

        // I: F(x)^2 at uniform x in R_k.  J: L^2 F(y, t) F(y, t') at uniform y in
        // R_{k-1} and independent t, t' uniform on [0, L], L = 1 - sum(y).
        std::exponential_distribution<double> e(1.0);
        std::uniform_real_distribution<double> u(0, 1);
        std::vector<double> g(f.k + 1), x(f.k);
        double si = 0, sqi = 0, sj = 0, sqj = 0;
        for (long s = 0; s < kSamples; ++s) {
            double tot = 0;
            for (double& v : g) tot += (v = e(rng));
            for (unsigned i = 0; i < f.k; ++i) x[i] = g[i] / tot;
            const double vi = f(x);
            si += vi * vi;
            sqi += vi * vi * vi * vi;

            double L = 1;
            for (unsigned i = 0; i + 1 < f.k; ++i) L -= (x[i] = g[i] / (tot - g[f.k - 1]));
            x[f.k - 1] = L * u(rng);
            const double f1 = f(x);
            x[f.k - 1] = L * u(rng);
            const double vj = L * L * f1 * f(x);
            sj += vj;
            sqj += vj * vj;
        }
        auto zscore = [&](double sum, double sq, double vol, double exact) {
            const double mean = sum / kSamples, sd = std::sqrt(std::max(0.0, sq / kSamples - mean * mean) / kSamples);
            return std::abs(mean * vol - exact) / (sd * vol + 1e-300);
        };
        const double zi = zscore(si, sqi, vol_k, I), zj = zscore(sj, sqj, vol_km1, J);
        worst = std::max({worst, zi, zj});
        if (zi > 3 || zj > 3) {
            ok = false;
            info("case " + std::to_string(c) + " k=" + std::to_string(f.k) + ": z(I)=" + fmt(zi, 3) + " z(J)=" + fmt(zj, 3));
        }
    }
    info("Monte Carlo, 20 cases x 1e7 samples, largest |z| over I and J = " + fmt(worst, 3));
    return ok;
}

// ------------------------------------------------------------------ 3

bool criterion_identities() {
    const auto t0 = Clock::now();
    bool ok = true;
    std::size_t checked = 0;
    for (auto h : {std::vector<Offset>{0}, std::vector<Offset>{0, 2}}) {
        AdmissibleTuple H(h);
        for (u64 R : {10, 15, 20}) {
            auto P = with_integer_R(build_params(static_cast<unsigned>(H.size()), H, 1'000'000, Rational(1, 2),
                                                 Rational(1, 20), 3, Rational(1, 50)),
                                    R);
            for (unsigned deg : {0u, 1u}) {
                WeightContext<Rational> ctx(P, weight_function(P.k, deg));
                auto [l, r] = selberg_quadratic_form(ctx);
                ok = ok && l == r;
                ++checked;
                for (u64 p = 5; p < R; ++p) {
                    if (!is_prime(p)) continue;
                    auto [tl, tr] = tp_quadratic_form(p, ctx);
                    if (tl != tr) {
                        ok = false;
                        info("T_p mismatch k=" + std::to_string(P.k) + " R=" + std::to_string(R) + " p=" + std::to_string(p));
                    }
                    ++checked;
                }
            }
        }
    }
    const double secs = seconds_since(t0);
    info(std::to_string(checked) + " exact identities checked (k = 1, 2; D0 = 3; R = 10, 15, 20) in " + fmt(secs, 3) + " s");
    return ok && secs < 10;
}

// ------------------------------------------------------------------ 4

bool squarefree(u64 n) {
    for (u64 d = 2; d * d <= n; ++d)
        if (n % (d * d) == 0) return false;
    return true;
}

int mu(u64 n) {
    if (!squarefree(n)) return 0;
    int s = 1;
    for (u64 d = 2; d <= n; ++d)
        if (n % d == 0 && is_prime(d)) s = -s;
    return s;
}

u64 phi(u64 n) {
    u64 c = 0;
    for (u64 a = 1; a <= n; ++a) c += std::gcd(a, n) == 1;
    return c;
}

bool criterion_weights() {
    AdmissibleTuple H({0, 2});
    auto P = with_integer_R(build_params(2, H, 1'000'000, Rational(1, 2), Rational(1, 20), 3, Rational(1, 50)), 10);
    const PolyF F = weight_function(2, 1);
    WeightContext<double> ctx(P, F);

    auto y = [&](u64 r1, u64 r2) {
        if (r1 * r2 >= 10 || !squarefree(r1) || !squarefree(r2)) return 0.0;
        if (std::gcd(r1, P.W) != 1 || std::gcd(r2, P.W) != 1 || std::gcd(r1, r2) != 1) return 0.0;
        std::vector<double> t{std::log(double(r1)) / P.log_R, std::log(double(r2)) / P.log_R};
        return F.evaluate<double>(std::span<const double>(t));
    };
    auto lambda = [&](u64 d1, u64 d2) {
        double s = 0;
        for (u64 r1 = d1; r1 < 10; r1 += d1)
            for (u64 r2 = d2; r2 < 10; r2 += d2) s += y(r1, r2) / double(phi(r1) * phi(r2));
        return mu(d1) * double(d1) * mu(d2) * double(d2) * s;
    };

    std::mt19937_64 rng(4);
    double worst = 0;
    u64 nonzero = 0;
    for (int t = 0; t < 100; ++t) {
        const u64 n = P.nu0 + P.W * (1 + rng() % 10'000'000);
        std::vector<std::pair<u64, u64>> ds;
        for (u64 d1 = 1; d1 < 10; ++d1)
            for (u64 d2 = 1; d2 < 10; ++d2)
                if (n % d1 == 0 && (n + 2) % d2 == 0) ds.emplace_back(d1, d2);
        double naive = 0;
        for (auto [d1, d2] : ds)
            for (auto [e1, e2] : ds) naive += lambda(d1, d2) * lambda(e1, e2);
        const double w = ctx.compute_weight(n);
        nonzero += w != 0;
        worst = std::max(worst, std::abs(w - naive) / std::max(1.0, std::abs(naive)));
    }
    info("100 random n = nu0 mod 6, largest relative gap " + fmt(worst, 3) + ", " + std::to_string(nonzero) +
         " nonzero weights");
    return worst < 1e-9;
}

// ------------------------------------------------------------------ 5

bool criterion_s1_bounds() {
    auto with = [](std::vector<std::string> head, const std::string& c1 = "1/50") {
        head.insert(head.end(), {"--tuple", "0,2,6", "--N", "1000000", "--D0", "5", "--c1", c1});
        return cli_json(head);
    };
    Json l2 = with({"sums", "lemma2"});
    std::string primes;
    for (const auto& row : l2["rows"]) primes += (primes.empty() ? "" : ",") + std::to_string(row["p"].get<u64>());
    info("S1,p ratios for p = " + primes + ": max " + fmt(l2["max_ratio"].get<double>(), 4) + " (budget 4)");
    Json l1 = with({"sums", "lemma1"});
    const auto& w = l1["windows"];
    info("S1- constants on [1e6,2e6) and [2e6,4e6): " + fmt(w[0]["constant"].get<double>()) + ", " +
         fmt(w[1]["constant"].get<double>()) + (l1["degenerate"].get<bool>() ? " (S1- = 0: n^(1/50) < 2 below 2^50)" : ""));
    const bool ok = l2["within_budget"].get<bool>() && l2["rows"].size() == 10 && l1["partition_exact"].get<bool>() &&
                    l1["stable"].get<bool>();

    Json alt = with({"sums", "lemma1"}, "1/5");
    const auto& wa = alt["windows"];
    info("at c1 = 1/5 the constants are " + fmt(wa[0]["constant"].get<double>()) + ", " +
         fmt(wa[1]["constant"].get<double>()) + ", partition exact " + (alt["partition_exact"].get<bool>() ? "yes" : "no"));
    return ok;
}

// ------------------------------------------------------------------ 6

bool criterion_main_terms() {
    const auto t0 = Clock::now();
    Json j = cli_json({"sums", "run", "--N", "10000000"});
    const double measured = j["S2_over_S1"].get<double>();
    const double predicted = j["predicted"]["S2_over_S1"].get<double>();
    const double ratio = measured / predicted;
    info("N = 1e7, D0 = 7, F degree 1: S2/S1 = " + fmt(measured) + ", predicted (log R/log N) sum J/I = " +
         fmt(predicted) + ", ratio " + fmt(ratio, 4) + " (" + fmt(seconds_since(t0), 3) + " s)");
    std::string sweep;
    for (std::string d0 : {"1", "2", "3", "5", "11"}) {
        Json s = cli_json({"sums", "run", "--N", "10000000", "--D0", d0});
        sweep += (sweep.empty() ? "" : ", ") + ("D0=" + d0 + " ") + fmt(s["main_term_ratio"].get<double>(), 3);
    }
    info("same ratio across D0: " + sweep);
    info("at R = N^(1/5) ~ 25 the residue-class boost W/phi(W) is not absorbed by log R, so the ratio is far from 1");
    return ratio >= 0.5 && ratio <= 2.0;
}

// ------------------------------------------------------------------ 7

bool criterion_aps() {
    bool ok = true;
    auto small = find_pattern_APs({0, 2}, 3, 100, false);
    bool seen = false;
    for (const auto& w : small.witnesses) seen = seen || (w.start == 5 && w.d == 6);
    info("{0,2}, l = 3, X = 100: " + std::to_string(small.total) + " progressions, {5,11,17} present: " + (seen ? "yes" : "no"));
    ok = ok && seen;

    constexpr u64 X = 1'000'000;
    std::vector<char> composite(X + 8, 0);
    composite[0] = composite[1] = 1;
    for (u64 i = 2; i * i < composite.size(); ++i)
        if (!composite[i])
            for (u64 j = i * i; j < composite.size(); j += i) composite[j] = 1;
    for (auto pattern : {std::vector<Offset>{0, 2}, std::vector<Offset>{0, 2, 6}}) {
        for (unsigned ell : {2u, 3u}) {
            std::vector<u64> hits;
            for (u64 n = 0; n <= X; ++n) {
                bool all = true;
                for (Offset h : pattern) all = all && !composite[n + static_cast<u64>(h)];
                if (all) hits.push_back(n);
            }
            const std::unordered_set<u64> set(hits.begin(), hits.end());
            u64 oracle = 0;
            for (std::size_t a = 0; a < hits.size(); ++a)
                for (std::size_t b = a + 1; b < hits.size(); ++b) {
                    const u64 d = hits[b] - hits[a];
                    bool good = true;
                    for (unsigned t = 2; t < ell; ++t) good = good && set.count(hits[a] + t * d);
                    oracle += good;
                }
            auto got = find_pattern_APs(pattern, ell, X, false);
            bool verified = true;
            for (const auto& w : got.witnesses) verified = verified && verify_witness(w);
            info("pattern " + format_offsets(pattern) + ", l = " + std::to_string(ell) + ": hits " +
                 std::to_string(got.hits) + "/" + std::to_string(hits.size()) + ", progressions " +
                 std::to_string(got.total) + "/" + std::to_string(oracle) + ", " + std::to_string(got.witnesses.size()) +
                 " witnesses re-verified: " + (verified ? "yes" : "no"));
            ok = ok && got.hits == hits.size() && got.total == oracle && verified;
        }
    }
    return ok;
}

// ------------------------------------------------------------------ 8

bool criterion_rough() {
    AdmissibleTuple H({0, 2, 6});
    auto density = [&](Rational c1, u64 X) {
        auto P = build_params(3, H, X, Rational(1, 2), Rational(1, 20), 7, c1);
        return scan_rough(P, X);
    };
    auto a = density(Rational(1, 4), 100'000), b = density(Rational(1, 4), 1'000'000);
    const double spread = std::max(a.normalized, b.normalized) / std::min(a.normalized, b.normalized);
    info("c1 = 1/4: count*(log X)^3/X = " + fmt(a.normalized, 5) + " (X=1e5, " + std::to_string(a.count) + ") and " +
         fmt(b.normalized, 5) + " (X=1e6, " + std::to_string(b.count) + "), spread " + fmt(spread, 4));
    auto c = density(Rational(1, 50), 100'000), d = density(Rational(1, 50), 1'000'000);
    info("c1 = 1/50 (roughness vacuous, every n = nu0 mod W counts): " + fmt(c.normalized, 5) + " and " +
         fmt(d.normalized, 5) + ", spread " + fmt(std::max(c.normalized, d.normalized) / std::min(c.normalized, d.normalized), 4));
    return a.count > 0 && b.count > 0 && spread <= 1.5;
}

// ------------------------------------------------------------------ 9

bool criterion_determinism() {
    const std::vector<std::vector<std::string>> cmds = {
        {"admissible", "check", "--tuple", "0,2,6"},
        {"admissible", "find", "--k", "6", "--strategy", "exhaustive"},
        {"admissible", "subset", "--tuple", "0,4,6,10,12,16", "--m", "3"},
        {"mk", "optimize", "--k", "5", "--degree", "1"},
        {"sums", "run", "--N", "200000", "--c1", "1/4"},
        {"sums", "lemma1", "--N", "100000", "--D0", "5", "--c1", "1/4"},
        {"sums", "lemma2", "--N", "100000", "--D0", "5"},
        {"sums", "tp-identity", "--tuple", "0,2", "--D0", "3", "--R", "12"},
        {"scan", "rough", "--X", "100000", "--c1", "1/4"},
        {"scan", "hits", "--pattern", "0,2", "--hi", "5000", "--tuple", "0,2,6"},
        {"scan", "aps", "--X", "20000"},
        {"scan", "subsets", "--A", "2,4,6,8", "--m", "2", "--ell", "2", "--X", "10000"},
    };
    bool ok = true;
    std::size_t compared = 0;
    for (const auto& cmd : cmds)
        for (std::string format : {"json", "jsonl", "csv"}) {
            std::vector<std::string> outs;
            for (std::string threads : {"1", "4", "4"}) {
                auto args = cmd;
                args.insert(args.end(), {"--no-timestamp", "--threads", threads, "--format", format});
                auto r = cli_run(args);
                if (r.code != 0) {
                    ok = false;
                    info(cmd[0] + " " + cmd[1] + " exited " + std::to_string(r.code) + ": " + r.err);
                }
                outs.push_back(r.out);
            }
            ++compared;
            if (outs[0] != outs[1] || outs[1] != outs[2]) {
                ok = false;
                info(cmd[0] + " " + cmd[1] + " (" + format + ") differs across runs");
            }
        }
    info(std::to_string(cmds.size()) + " subcommands x 3 formats, each run with threads 1, 4, 4: " +
         std::to_string(compared) + " comparisons");
    return ok;
}

struct Criterion {
    int id;
    std::string name;
    bool (*run)();
};

std::set<int> parse_expect_fail(int argc, char** argv) {
    std::set<int> out;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a != "--expect-fail" || i + 1 >= argc) throw std::invalid_argument("usage: acceptance [--expect-fail N[,N...]]");
        std::stringstream ss(argv[++i]);
        for (std::string tok; std::getline(ss, tok, ',');) out.insert(std::stoi(tok));
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> expected_fail;
    try {
        expected_fail = parse_expect_fail(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }
    const std::vector<Criterion> criteria = {
        {1, "M_105 lower bound above 4 with r_k = 2 in under 10 minutes", criterion_mk},
        {2, "simplex integrals: constant basis closed form and Monte Carlo agreement", criterion_integrals},
        {3, "Selberg and T_p quadratic-form identities hold exactly", criterion_identities},
        {4, "sieve weights match a naive double enumeration", criterion_weights},
        {5, "S1,p within budget, S1- partition exact and stable across windows", criterion_s1_bounds},
        {6, "measured S2/S1 within a factor 2 of the main-term prediction at N = 1e7", criterion_main_terms},
        {7, "pattern progressions match a brute-force oracle", criterion_aps},
        {8, "rough-translate density stable between X = 1e5 and 1e6", criterion_rough},
        {9, "reports byte-identical across runs and thread counts", criterion_determinism},
    };
    int unexpected = 0;
    for (const auto& c : criteria) {
        bool pass = false;
        const auto t0 = Clock::now();
        try {
            pass = c.run();
        } catch (const std::exception& e) {
            info(std::string("exception: ") + e.what());
        }
        const bool expected = expected_fail.contains(c.id);
        std::cout << "criterion " << c.id << ": " << (pass ? "PASS" : "FAIL") << (expected ? " (expected FAIL)" : "")
                  << "  " << c.name << "  [" << fmt(seconds_since(t0), 3) << " s]\n"
                  << std::flush;
        if (pass == expected) ++unexpected;
    }
    std::cout << (unexpected == 0 ? "acceptance: all criteria as expected\n"
                                  : "acceptance: " + std::to_string(unexpected) + " unexpected result(s)\n");
    return unexpected == 0 ? 0 : 1;
}
