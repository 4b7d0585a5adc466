#include "pantilt/fusion.hpp"
#include "pantilt/fusion_reference.hpp"
#include "pantilt/rng.hpp"
#include "pantilt/scenario.hpp"
#include "pantilt/trace_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace {

using namespace pantilt;

// ---------------------------------------------------------------- fusion-check

Tensor random_tokens(Rng& rng, std::size_t t, std::size_t d) {
    Tensor x = Tensor::tokens(t, d);
    for (double& v : x.data)
        v = rng.normal();
    return x;
}

Tensor random_chw(Rng& rng, std::size_t c, std::size_t h, std::size_t w) {
    Tensor x = Tensor::chw(c, h, w);
    for (double& v : x.data)
        v = rng.normal();
    return x;
}

Conv1x1 random_conv(Rng& rng, std::size_t co, std::size_t ci) {
    Conv1x1 k{co, ci, std::vector<double>(co * ci), std::vector<double>(co)};
    for (double& v : k.weights)
        v = rng.normal() * 0.5;
    for (double& v : k.bias)
        v = rng.normal() * 0.1;
    return k;
}

MhsaConfig random_mhsa(Rng& rng, std::size_t heads, std::size_t model_dim) {
    MhsaConfig cfg;
    cfg.heads = heads;
    cfg.model_dim = model_dim;
    cfg.key_dim = model_dim / heads;
    cfg.wq = random_tokens(rng, model_dim, model_dim);
    cfg.wk = random_tokens(rng, model_dim, model_dim);
    cfg.wv = random_tokens(rng, model_dim, model_dim);
    cfg.wo = random_tokens(rng, model_dim, model_dim);
    return cfg;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.uniform() * static_cast<double>(hi - lo + 1));
}

struct CheckReport {
    int violations = 0;
    void require(bool ok, const std::string& name, const std::string& detail) {
        if (!ok) {
            ++violations;
            std::cout << "[FAIL] " << name << ": " << detail << "\n";
        }
    }
};

int run_fusion_checks(std::uint64_t seed, int trials, bool inject_fault) {
    Rng rng(seed);
    CheckReport rep;

    for (int trial = 0; trial < trials; ++trial) {
        // 1x1 conv against the scalar-loop oracle
        {
            const std::size_t ci = pick(rng, 1, 8), co = pick(rng, 1, 8);
            const std::size_t h = pick(rng, 1, 8), w = pick(rng, 1, 8);
            const Tensor x = random_chw(rng, ci, h, w);
            const Conv1x1 k = random_conv(rng, co, ci);
            Tensor ref = reference::conv1x1(x, k);
            if (inject_fault && trial == 0)
                ref.data[0] += 1e-6; // negative control: must be caught below
            rep.require(max_abs_diff(adjust_conv(x, k), ref) <= 1e-12, "conv_oracle",
                        "adjust_conv deviates from the scalar-loop reference");
        }

        // attention invariants
        {
            const std::size_t t = pick(rng, 1, 8), d = pick(rng, 1, 8);
            const Tensor q = random_tokens(rng, t, d);
            const Tensor k = random_tokens(rng, t, d);

            // with V = identity the output rows are the softmax weights
            Tensor eye = Tensor::tokens(t, t);
            for (std::size_t i = 0; i < t; ++i)
                eye.at(i, i) = 1.0;
            const Tensor weights = attention(q, k, eye, d);
            for (std::size_t i = 0; i < t; ++i) {
                double sum = 0.0, mn = 1.0;
                for (std::size_t j = 0; j < t; ++j) {
                    sum += weights.at(i, j);
                    mn = std::min(mn, weights.at(i, j));
                }
                rep.require(std::abs(sum - 1.0) <= 1e-9, "softmax_rows",
                            "softmax row does not sum to 1");
                rep.require(mn >= 0.0, "softmax_rows", "negative attention weight");
            }

            const Tensor v = random_tokens(rng, t, pick(rng, 1, 6));
            const Tensor out = attention(q, k, v, d);
            for (std::size_t c = 0; c < v.shape[1]; ++c) {
                double lo = v.at(0, c), hi = v.at(0, c);
                for (std::size_t j = 1; j < t; ++j) {
                    lo = std::min(lo, v.at(j, c));
                    hi = std::max(hi, v.at(j, c));
                }
                for (std::size_t i = 0; i < t; ++i)
                    rep.require(out.at(i, c) >= lo - 1e-12 && out.at(i, c) <= hi + 1e-12,
                                "convex_hull", "attention output escapes the V column range");
            }

            // jointly permuting K and V rows must not change the output
            std::vector<std::size_t> perm(t);
            for (std::size_t i = 0; i < t; ++i)
                perm[i] = i;
            for (std::size_t i = t; i > 1; --i)
                std::swap(perm[i - 1], perm[pick(rng, 0, i - 1)]);
            Tensor kp = k, vp = v;
            for (std::size_t i = 0; i < t; ++i) {
                for (std::size_t c = 0; c < k.shape[1]; ++c)
                    kp.at(i, c) = k.at(perm[i], c);
                for (std::size_t c = 0; c < v.shape[1]; ++c)
                    vp.at(i, c) = v.at(perm[i], c);
            }
            rep.require(max_abs_diff(attention(q, kp, vp, d), out) <= 1e-12, "kv_permutation",
                        "joint K/V row permutation changed the attention output");

            // single token: output is exactly that V row
            const Tensor v1 = random_tokens(rng, 1, pick(rng, 1, 6));
            const Tensor q1 = random_tokens(rng, 1, d);
            const Tensor k1 = random_tokens(rng, 1, d);
            rep.require(attention(q1, k1, v1, d).data == v1.data, "single_token",
                        "single-token attention must return the V row exactly");

            // identical keys: every output row is the column mean of V
            Tensor ksame = Tensor::tokens(t, d);
            for (std::size_t i = 0; i < t; ++i)
                for (std::size_t c = 0; c < d; ++c)
                    ksame.at(i, c) = k.at(0, c);
            const Tensor mixed = attention(q, ksame, v, d);
            for (std::size_t c = 0; c < v.shape[1]; ++c) {
                double mean = 0.0;
                for (std::size_t j = 0; j < t; ++j)
                    mean += v.at(j, c);
                mean /= static_cast<double>(t);
                for (std::size_t i = 0; i < t; ++i)
                    rep.require(std::abs(mixed.at(i, c) - mean) <= 1e-12, "identical_keys",
                                "uniform attention must average the V rows");
            }
        }

        // mhsa against the flat-loop oracle + identity collapse
        {
            const std::size_t heads = std::size_t{1} << pick(rng, 0, 2); // 1, 2, 4
            const std::size_t dk = pick(rng, 1, 3);
            const std::size_t model_dim = heads * dk;
            const std::size_t t = pick(rng, 1, 6);
            const Tensor x = random_tokens(rng, t, model_dim);
            const MhsaConfig cfg = random_mhsa(rng, heads, model_dim);
            const Tensor y = mhsa(x, cfg);
            rep.require(y.shape == x.shape, "mhsa_shape", "mhsa must preserve the input shape");
            rep.require(max_abs_diff(y, reference::mhsa(x, cfg)) <= 1e-12, "mhsa_oracle",
                        "mhsa deviates from the flat-loop reference");

            const MhsaConfig id = MhsaConfig::identity(1, model_dim);
            rep.require(max_abs_diff(mhsa(x, id), attention(x, x, x, model_dim)) <= 1e-12,
                        "mhsa_identity",
                        "single-head identity-projection mhsa must equal plain attention");
        }

        // speed modulation and the fused block
        {
            const double diag = 100.0 + rng.uniform() * 900.0;
            const double disp = rng.uniform() * 2.0 * diag;
            const SpeedModulation mod = speed_modulation(disp, diag);
            rep.require(mod.w0_scale + mod.w1_scale == 1.0, "weight_sum",
                        "fusion weights must sum to exactly 1");
            rep.require(mod.w0_scale >= 0.0 && mod.w0_scale <= 1.0 && mod.w1_scale >= 0.0 &&
                            mod.w1_scale <= 1.0,
                        "weight_sum", "fusion weights must lie in [0, 1]");

            const std::size_t c = pick(rng, 1, 4);
            const std::size_t h = pick(rng, 1, 4), w = pick(rng, 1, 4);
            const Tensor x0 = random_chw(rng, c, h, w);
            const Tensor x1 = random_chw(rng, c, h, w);
            const Conv1x1 conv = random_conv(rng, c, c);
            const std::size_t heads = (2 * c) % 2 == 0 ? 2 : 1;
            const MhsaConfig cfg = random_mhsa(rng, heads, 2 * c);

            const Tensor fused = cfam_fuse(x0, x1, conv, cfg, mod);
            rep.require(fused.shape[0] == 2 * c && fused.shape[1] == h && fused.shape[2] == w,
                        "cfam_shape", "fused output must double the channel count");
            rep.require(max_abs_diff(fused, reference::cfam_fuse(x0, x1, conv, cfg, mod)) <= 1e-12,
                        "cfam_oracle", "cfam_fuse deviates from the scalar-loop reference");

            // zero output projection: every fused value collapses to x0 + x1
            MhsaConfig zero = cfg;
            zero.wo = Tensor::tokens(2 * c, 2 * c);
            const Tensor collapsed = cfam_fuse(x0, x1, conv, zero, mod);
            bool ok = true;
            for (std::size_t ci = 0; ci < c && ok; ++ci)
                for (std::size_t yy = 0; yy < h && ok; ++yy)
                    for (std::size_t xx = 0; xx < w && ok; ++xx) {
                        const double want = x0.at(ci, yy, xx) + x1.at(ci, yy, xx);
                        ok = collapsed.at(ci, yy, xx) == want &&
                             collapsed.at(c + ci, yy, xx) == want;
                    }
            rep.require(ok, "cfam_zero_weight",
                        "with zero attention weights both halves must equal x0 + x1");
        }
    }

    if (rep.violations == 0)
        std::cout << "fusion-check: all invariants held over " << trials << " trials\n";
    else
        std::cout << "fusion-check: " << rep.violations << " violation(s)\n";
    return rep.violations;
}

// ------------------------------------------------------------------- commands

std::string default_out_dir() {
    if (const char* env = std::getenv("PANTILT_OUT_DIR"); env && *env)
        return env;
    return "out";
}

sim::Scenario load_with_seed(const std::string& path, const std::optional<std::uint64_t>& seed) {
    sim::Scenario s = sim::load_scenario_file(path);
    if (seed)
        s.seed = *seed;
    return s;
}

std::string opt_str(const std::optional<double>& v) {
    return v ? std::to_string(*v) : std::string("n/a");
}

int cmd_run(const std::string& scenario_path, const std::string& out_dir,
            const std::optional<std::uint64_t>& seed, const std::string& format) {
    const sim::Scenario s = load_with_seed(scenario_path, seed);
    const sim::Trace trace = sim::run_scenario(s);
    const sim::Metrics metrics = sim::compute_metrics(trace, s);

    const std::filesystem::path dir(out_dir);
    const std::string trace_path =
        (dir / (s.name + "_trace." + (format == "json" ? "json" : "csv"))).string();
    sim::write_text_file(trace_path, format == "json" ? sim::trace_to_json(trace)
                                                      : sim::trace_to_csv(trace));
    const std::string metrics_path = (dir / (s.name + "_metrics.json")).string();
    sim::write_text_file(metrics_path, sim::metrics_to_json(metrics, s));

    std::cout << "wrote " << trace_path << "\n"
              << "wrote " << metrics_path << "\n"
              << "settle_time_s=" << opt_str(metrics.settle_time_s)
              << " rms_error_px=" << metrics.rms_error_px
              << " pwm_jitter_us=" << metrics.pwm_jitter_us << "\n";
    return 0;
}

int cmd_compare(const std::string& path_a, const std::string& path_b, const std::string& out_dir,
                const std::optional<std::uint64_t>& seed) {
    const sim::Scenario a = load_with_seed(path_a, seed);
    const sim::Scenario b = load_with_seed(path_b, seed);
    const sim::CompareReport rep = sim::compare_runs(a, b);

    const std::string out_path =
        (std::filesystem::path(out_dir) / "compare_metrics.json").string();
    sim::write_text_file(out_path, sim::compare_to_json(rep, a, b));

    std::cout << "A " << a.name << ": settle=" << opt_str(rep.a.settle_time_s)
              << " jitter=" << rep.a.pwm_jitter_us << "\n"
              << "B " << b.name << ": settle=" << opt_str(rep.b.settle_time_s)
              << " jitter=" << rep.b.pwm_jitter_us << "\n"
              << "eta_pct=" << opt_str(rep.eta_pct)
              << " jitter_delta_us=" << rep.jitter_delta_us << "\n"
              << "wrote " << out_path << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic pan-tilt tracking simulator"};
    app.require_subcommand(1);

    std::string scenario_path, out_dir = default_out_dir(), format = "csv";
    std::string compare_a, compare_b;
    std::optional<std::uint64_t> seed;
    std::uint64_t fusion_seed = 12345;
    int fusion_trials = 25;
    bool inject_fault = false;

    CLI::App* run = app.add_subcommand("run", "Run one scenario and write trace + metrics");
    run->add_option("--scenario", scenario_path, "Scenario JSON file")->required();
    run->add_option("--out", out_dir, "Output directory (default: $PANTILT_OUT_DIR or ./out)");
    run->add_option("--seed", seed, "Override the scenario seed");
    run->add_option("--format", format, "Trace format")
        ->check(CLI::IsMember({"csv", "json"}));

    CLI::App* cmp = app.add_subcommand("compare", "Run two control variants and pair metrics");
    cmp->add_option("a", compare_a, "First scenario JSON file")->required();
    cmp->add_option("b", compare_b, "Second scenario JSON file")->required();
    cmp->add_option("--out", out_dir, "Output directory (default: $PANTILT_OUT_DIR or ./out)");
    cmp->add_option("--seed", seed, "Override both scenario seeds");

    CLI::App* fus = app.add_subcommand("fusion-check", "Run the fusion invariant suite");
    fus->add_option("--seed", fusion_seed, "Seed for the randomized trials");
    fus->add_option("--trials", fusion_trials, "Number of randomized trials")
        ->check(CLI::PositiveNumber);
    fus->add_flag("--inject-fault", inject_fault)->group(""); // negative-control hook

    try {
        app.parse(argc, argv);
        if (run->parsed())
            return cmd_run(scenario_path, out_dir, seed, format);
        if (cmp->parsed())
            return cmd_compare(compare_a, compare_b, out_dir, seed);
        return run_fusion_checks(fusion_seed, fusion_trials, inject_fault) == 0 ? 0 : 4;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // command-line parse failures share the parse exit code
    } catch (const pantilt::ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const pantilt::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 3;
    } catch (const pantilt::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
