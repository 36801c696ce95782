// covertkey: covert / wiretap secret-key region computation and coding
// simulation for binary-input two-user MAC pairs.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "covertkey/errors.hpp"
#include "covertkey/mac.hpp"
#include "covertkey/regions.hpp"
#include "covertkey/sim.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace covertkey;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitBudget = 4;

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string file_hash(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    char out[20];
    std::snprintf(out, sizeof out, "%016llx",
                  static_cast<unsigned long long>(fnv1a(buf.str())));
    return out;
}

BinaryMacPair load_validated(const std::string& path) {
    BinaryMacPair mac = BinaryMacPair::load_file(path);
    ValidationReport report = validate(mac);
    if (!report.ok()) {
        std::cerr << "channel validation failed for " << path << ":\n"
                  << report.to_string();
        std::exit(kExitValidation);
    }
    return mac;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> seed) {
    if (seed) return *seed;
    std::random_device rd;
    std::uint64_t s = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cout << "seed: " << s << "\n";
    return s;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write '" + path.string() + "'");
    out << text;
}

void write_manifest(const fs::path& dir, const std::string& command, json params,
                    const std::vector<std::string>& outputs) {
    json m;
    m["command"] = command;
    m["params"] = std::move(params);
    m["outputs"] = outputs;
    write_text(dir / (command + "_manifest.json"), m.dump(2) + "\n");
}

double parse_rho1(const std::string& rho) {
    double rho1 = 0.0, rho2 = 0.0;
    if (rho.find(',') != std::string::npos) {
        if (std::sscanf(rho.c_str(), "%lf,%lf", &rho1, &rho2) != 2 ||
            std::fabs(rho1 + rho2 - 1.0) > 1e-9)
            throw CLI::ValidationError("--rho", "expected rho1,rho2 with rho1+rho2=1");
    } else {
        try {
            rho1 = std::stod(rho);
        } catch (...) {
            throw CLI::ValidationError("--rho", "expected a real number");
        }
    }
    if (!(rho1 > 0.0 && rho1 < 1.0))
        throw CLI::ValidationError("--rho", "rho1 must lie in (0,1)");
    return rho1;
}

std::array<UserSizes, 2> parse_sizes(long g, long m, long nr) {
    if (g < 1 || m < 1 || nr < 1)
        throw CLI::ValidationError("--g/--m/--nrand", "sizes must be >= 1");
    return {{{g, m, nr}, {g, m, nr}}};
}

json boundary_json(const RegionBoundary& b, json metadata) {
    json points = json::array();
    for (const auto& p : b.points) {
        json row{{"r1", p.r1}, {"r2", p.r2}};
        if (!std::isnan(p.rho1)) row["rho1"] = p.rho1;
        if (!std::isnan(p.px1)) {
            row["px1"] = p.px1;
            row["px2"] = p.px2;
        }
        points.push_back(row);
    }
    return json{{"kind", region_kind_name(b.kind)},
                {"metadata", std::move(metadata)},
                {"points", points}};
}

json lemma3_json(const Lemma3Breakdown& b) {
    json terms = json::array();
    for (const auto& t : b.terms)
        terms.push_back({{"subset_mask", t.subset_mask},
                         {"exp_term", t.exp_term},
                         {"prob_term", t.prob_term}});
    return json{{"total", b.total},
                {"prefactor", b.prefactor},
                {"mu_used", b.mu_used},
                {"terms", terms}};
}

struct RegionCskArgs {
    std::string channel;
    std::string out = ".";
    std::size_t grid = 1001;
    std::size_t samples = 512;
};

int cmd_region_csk(const RegionCskArgs& args) {
    BinaryMacPair mac = load_validated(args.channel);
    fs::create_directories(args.out);
    std::vector<double> grid = default_rho_grid(args.grid);

    json metadata{{"channel", args.channel},
                  {"channel_hash", file_hash(args.channel)},
                  {"grid", args.grid}};
    std::vector<std::string> outputs;
    for (RegionKind kind : {RegionKind::CskInner, RegionKind::CskOuter}) {
        RegionBoundary boundary = region_union(mac, kind, grid);
        std::string name = region_kind_name(kind);
        write_boundary_csv((fs::path(args.out) / (name + ".csv")).string(), boundary);
        write_envelope_csv((fs::path(args.out) / (name + "_envelope.csv")).string(), kind,
                           boundary.sample_envelope(args.samples));
        write_text(fs::path(args.out) / (name + ".json"),
                   boundary_json(boundary, metadata).dump(2) + "\n");
        outputs.push_back(name + ".csv");
        outputs.push_back(name + "_envelope.csv");
        outputs.push_back(name + ".json");
    }
    write_manifest(args.out, "region_csk",
                   json{{"channel", args.channel},
                        {"channel_hash", file_hash(args.channel)},
                        {"grid", args.grid},
                        {"samples", args.samples}},
                   outputs);
    std::cout << "region-csk: wrote " << outputs.size() << " files to " << args.out << "\n";
    return kExitOk;
}

struct RegionWskArgs {
    std::string channel;
    std::string out = ".";
    std::size_t grid = 101;
    std::size_t samples = 512;
};

int cmd_region_wsk(const RegionWskArgs& args) {
    BinaryMacPair mac = load_validated(args.channel);
    fs::create_directories(args.out);
    std::vector<double> grid = default_wsk_grid(args.grid);
    WskSweep sweep = wsk_region_sweep(mac, grid, grid);

    json metadata{{"channel", args.channel},
                  {"channel_hash", file_hash(args.channel)},
                  {"grid", args.grid}};
    write_boundary_csv((fs::path(args.out) / "wsk_inner.csv").string(), sweep.inner);
    write_boundary_csv((fs::path(args.out) / "wsk_outer.csv").string(), sweep.outer);
    write_envelope_csv((fs::path(args.out) / "wsk_inner_envelope.csv").string(),
                       RegionKind::WskInner,
                       sweep.sample_envelope(WskKind::Inner, args.samples));
    write_envelope_csv((fs::path(args.out) / "wsk_outer_envelope.csv").string(),
                       RegionKind::WskOuter,
                       sweep.sample_envelope(WskKind::Outer, args.samples));
    write_text(fs::path(args.out) / "wsk_inner.json",
               boundary_json(sweep.inner, metadata).dump(2) + "\n");
    write_text(fs::path(args.out) / "wsk_outer.json",
               boundary_json(sweep.outer, metadata).dump(2) + "\n");
    std::vector<std::string> outputs{"wsk_inner.csv",          "wsk_outer.csv",
                                     "wsk_inner_envelope.csv", "wsk_outer_envelope.csv",
                                     "wsk_inner.json",         "wsk_outer.json"};
    write_manifest(args.out, "region_wsk",
                   json{{"channel", args.channel},
                        {"channel_hash", file_hash(args.channel)},
                        {"grid", args.grid},
                        {"samples", args.samples}},
                   outputs);
    std::cout << "region-wsk: wrote " << outputs.size() << " files to " << args.out << "\n";
    return kExitOk;
}

struct VerifyArgs {
    std::string channel;
    std::string out = ".";
    std::string rho = "0.28";
    std::vector<double> alphas{1e-2, 1e-3, 1e-4};
    double ratio_cap = 4.0;
};

int cmd_verify_expansions(const VerifyArgs& args) {
    BinaryMacPair mac = load_validated(args.channel);
    fs::create_directories(args.out);
    double rho1 = parse_rho1(args.rho);
    if (args.alphas.size() < 2)
        throw CLI::ValidationError("--alphas", "need at least two grid points");

    std::vector<ExpansionReport> reports;
    for (double a : args.alphas)
        reports.push_back(expansion_report(mac, CovertConfig(rho1, 1.0 - rho1, a)));

    json out;
    out["rho1"] = rho1;
    out["alphas"] = args.alphas;
    json per_alpha = json::array();
    for (const auto& rep : reports) {
        json subsets = json::array();
        for (const auto& sub : rep.subsets) {
            subsets.push_back({{"subset", sub.label},
                               {"mi_y",
                                {{"exact", sub.mi_y.exact},
                                 {"prediction", sub.mi_y.prediction},
                                 {"residual", sub.mi_y.residual}}},
                               {"mi_z",
                                {{"exact", sub.mi_z.exact},
                                 {"prediction", sub.mi_z.prediction},
                                 {"residual", sub.mi_z.residual}}},
                               {"mi_yz",
                                {{"exact", sub.mi_yz.exact},
                                 {"prediction", sub.mi_yz.prediction},
                                 {"residual", sub.mi_yz.residual}}},
                               {"var_y", sub.var_y},
                               {"var_z", sub.var_z},
                               {"dev_y", sub.dev_y},
                               {"dev_z", sub.dev_z}});
        }
        per_alpha.push_back({{"alpha", rep.alpha},
                             {"chi_n", rep.chi_n_value},
                             {"divergence",
                              {{"exact", rep.divergence.exact},
                               {"prediction", rep.divergence.prediction},
                               {"residual", rep.divergence.residual}}},
                             {"subsets", subsets}});
    }
    out["reports"] = per_alpha;

    // Bounded-ratio checks over the alpha grid.
    bool all_pass = true;
    json checks = json::array();
    auto ratio_check = [&](const std::string& name, auto value_of, double power) {
        double lo = 1e300, hi = 0.0;
        for (std::size_t i = 0; i < reports.size(); ++i) {
            double v = std::fabs(value_of(reports[i])) / std::pow(args.alphas[i], power);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        bool pass = hi <= args.ratio_cap * lo;
        all_pass = all_pass && pass;
        checks.push_back({{"name", name}, {"lo", lo}, {"hi", hi}, {"pass", pass}});
    };
    ratio_check("divergence_residual_over_alpha3",
                [](const ExpansionReport& r) { return r.divergence.residual; }, 3.0);
    const char* labels[3] = {"T1", "T2", "T12"};
    for (int s = 0; s < 3; ++s) {
        ratio_check(std::string(labels[s]) + "_mi_y_residual_over_alpha2",
                    [s](const ExpansionReport& r) { return r.subsets[s].mi_y.residual; },
                    2.0);
        ratio_check(std::string(labels[s]) + "_mi_z_residual_over_alpha2",
                    [s](const ExpansionReport& r) { return r.subsets[s].mi_z.residual; },
                    2.0);
        ratio_check(std::string(labels[s]) + "_mi_yz_residual_over_alpha2",
                    [s](const ExpansionReport& r) { return r.subsets[s].mi_yz.residual; },
                    2.0);
        ratio_check(std::string(labels[s]) + "_var_y_over_alpha",
                    [s](const ExpansionReport& r) { return r.subsets[s].var_y; }, 1.0);
        ratio_check(std::string(labels[s]) + "_var_z_over_alpha",
                    [s](const ExpansionReport& r) { return r.subsets[s].var_z; }, 1.0);
    }
    out["ratio_cap"] = args.ratio_cap;
    out["checks"] = checks;
    out["all_pass"] = all_pass;

    write_text(fs::path(args.out) / "expansions.json", out.dump(2) + "\n");
    write_manifest(args.out, "verify_expansions",
                   json{{"channel", args.channel},
                        {"channel_hash", file_hash(args.channel)},
                        {"rho", args.rho},
                        {"alphas", args.alphas},
                        {"ratio_cap", args.ratio_cap}},
                   {"expansions.json"});
    for (const auto& c : checks)
        std::cout << (c["pass"].get<bool>() ? "pass " : "FAIL ")
                  << c["name"].get<std::string>() << "\n";
    std::cout << (all_pass ? "verify-expansions: all checks passed\n"
                           : "verify-expansions: some checks FAILED\n");
    return kExitOk;
}

struct SimulateArgs {
    std::string channel;
    std::string out = ".";
    std::string rho = "0.28";
    double alpha = 0.25;
    int n = 4;
    double mu1 = 0.1, mu2 = 0.1, mu3 = 0.1;
    long g = 0, m = 0, nrand = 0;  // 0: derive from the rate plan
    long trials = 10000;
    std::optional<std::uint64_t> seed;
    std::string mode = "auto";  // auto | exact | mc
    std::string decoder = "key-posterior";
    bool decay = false;
    std::vector<int> n_list{8, 12, 16, 20};
    int codebooks = 10;
};

int cmd_simulate(const SimulateArgs& args) {
    BinaryMacPair mac = load_validated(args.channel);
    fs::create_directories(args.out);
    double rho1 = parse_rho1(args.rho);
    std::uint64_t seed = resolve_seed(args.seed);
    Decoder decoder = args.decoder == "joint-ml" ? Decoder::JointMl : Decoder::KeyPosterior;
    Mus mu{args.mu1, args.mu2, args.mu3};

    std::vector<std::string> outputs;
    if (args.decay) {
        DecayOptions opts;
        if (args.m > 0) opts.m = args.m;
        if (args.nrand > 0) opts.n_rand = args.nrand;
        opts.codebooks = args.codebooks;
        DecayStudy study = decay_study(
            mac, [](int n) { return alpha_schedule(n); }, args.n_list, mu, rho1,
            args.trials, seed, opts);
        write_decay_csv((fs::path(args.out) / "decay.csv").string(), study);
        write_text(fs::path(args.out) / "decay.json", decay_study_to_json(study, seed));
        outputs = {"decay.csv", "decay.json"};
        std::cout << "decay: fitted slopes p_err " << study.fit_p_err.slope
                  << ", source_tv " << study.fit_source_tv.slope << "\n";
    } else {
        CovertConfig cfg(rho1, 1.0 - rho1, args.alpha);
        RatePlan plan = args.g > 0 ? plan_from_sizes(mac, cfg, args.n, mu,
                                                     parse_sizes(args.g, args.m, args.nrand))
                                   : rate_plan(mac, cfg, args.n, mu);
        CodebookPair cb = sample_codebooks(plan, cfg, seed);
        write_text(fs::path(args.out) / "plan.json", rate_plan_to_json(plan, seed));
        outputs.push_back("plan.json");

        if (args.mode != "mc") {
            try {
                SimReport exact = exact_metrics(cb, mac, cfg, decoder);
                write_text(fs::path(args.out) / "sim_exact.json", sim_report_to_json(exact));
                write_text(fs::path(args.out) / "sim_exact.csv", sim_report_to_csv(exact));
                outputs.push_back("sim_exact.json");
                outputs.push_back("sim_exact.csv");
            } catch (const BudgetExceeded& e) {
                if (args.mode == "exact") throw;
                std::cout << "exact metrics skipped: " << e.what() << " (required "
                          << e.required_terms << " terms)\n";
            }
        }
        if (args.mode != "exact") {
            SimReport mc = protocol_metrics(cb, mac, cfg, args.trials, seed, decoder);
            write_text(fs::path(args.out) / "sim_mc.json", sim_report_to_json(mc));
            write_text(fs::path(args.out) / "sim_mc.csv", sim_report_to_csv(mc));
            outputs.push_back("sim_mc.json");
            outputs.push_back("sim_mc.csv");
            std::cout << "monte carlo: p_err " << mc.p_err << " +- " << mc.p_err_halfwidth
                      << " over " << mc.trials << " trials\n";
        }
    }
    write_manifest(args.out, "simulate",
                   json{{"channel", args.channel},
                        {"channel_hash", file_hash(args.channel)},
                        {"rho", args.rho},
                        {"alpha", args.alpha},
                        {"n", args.n},
                        {"mu1", args.mu1},
                        {"mu2", args.mu2},
                        {"mu3", args.mu3},
                        {"g", args.g},
                        {"m", args.m},
                        {"nrand", args.nrand},
                        {"trials", args.trials},
                        {"seed", seed},
                        {"mode", args.mode},
                        {"decoder", args.decoder},
                        {"decay", args.decay},
                        {"n_list", args.n_list},
                        {"codebooks", args.codebooks}},
                   outputs);
    return kExitOk;
}

struct BoundsArgs {
    std::string channel;
    std::string out = ".";
    std::string rho = "0.28";
    double alpha = 0.25;
    std::vector<int> n_list{8, 10, 12, 14, 16};
    double mu1 = 0.1, mu2 = 0.1, mu3 = 0.1;
    long g = 2, m = 2, nrand = 2;
};

int cmd_bounds(const BoundsArgs& args) {
    BinaryMacPair mac = load_validated(args.channel);
    fs::create_directories(args.out);
    double rho1 = parse_rho1(args.rho);
    Mus mu{args.mu1, args.mu2, args.mu3};

    json rows = json::array();
    for (int n : args.n_list) {
        CovertConfig cfg(rho1, 1.0 - rho1, args.alpha);
        RatePlan plan =
            plan_from_sizes(mac, cfg, n, mu, parse_sizes(args.g, args.m, args.nrand));
        Lemma3Breakdown rel = lemma3_reliability(plan, mac, cfg);
        Lemma3Breakdown res = lemma3_resolvability(plan, mac, cfg);
        rows.push_back({{"n", n},
                        {"alpha", args.alpha},
                        {"feasible", plan.feasible()},
                        {"reliability", lemma3_json(rel)},
                        {"resolvability", lemma3_json(res)}});
        std::cout << "n=" << n << " reliability RHS " << rel.total
                  << ", resolvability RHS " << res.total << "\n";
    }
    write_text(fs::path(args.out) / "bounds.json", json{{"rows", rows}}.dump(2) + "\n");
    write_manifest(args.out, "bounds",
                   json{{"channel", args.channel},
                        {"channel_hash", file_hash(args.channel)},
                        {"rho", args.rho},
                        {"alpha", args.alpha},
                        {"n_list", args.n_list},
                        {"mu1", args.mu1},
                        {"mu2", args.mu2},
                        {"mu3", args.mu3},
                        {"g", args.g},
                        {"m", args.m},
                        {"nrand", args.nrand}},
                   {"bounds.json"});
    return kExitOk;
}

struct ExamplesArgs {
    std::string out = "data";
};

int cmd_examples(const ExamplesArgs& args) {
    fs::create_directories(args.out);
    std::vector<std::string> outputs;
    for (int which : {1, 2}) {
        BinaryMacPair mac = BinaryMacPair::table1_channel(which);
        std::string name = "table1_channel" + std::to_string(which) + ".json";
        mac.save_file((fs::path(args.out) / name).string());
        outputs.push_back(name);

        std::vector<double> grid = default_rho_grid();
        for (RegionKind kind : {RegionKind::CskInner, RegionKind::CskOuter}) {
            RegionBoundary boundary = region_union(mac, kind, grid);
            std::string csv =
                "ch" + std::to_string(which) + "_" + region_kind_name(kind) + ".csv";
            write_boundary_csv((fs::path(args.out) / csv).string(), boundary);
            outputs.push_back(csv);
        }
    }
    // Expansion numbers for the first channel at the example weight split.
    BinaryMacPair mac1 = BinaryMacPair::table1_channel(1);
    json expansions = json::array();
    for (double a : {1e-2, 1e-3, 1e-4}) {
        ExpansionReport rep = expansion_report(mac1, CovertConfig(0.28, 0.72, a));
        expansions.push_back({{"alpha", a},
                              {"chi_n", rep.chi_n_value},
                              {"divergence_exact", rep.divergence.exact},
                              {"divergence_residual", rep.divergence.residual}});
    }
    write_text(fs::path(args.out) / "ch1_expansions.json",
               json{{"rho1", 0.28}, {"rows", expansions}}.dump(2) + "\n");
    outputs.push_back("ch1_expansions.json");

    write_manifest(args.out, "examples", json::object(), outputs);
    std::cout << "examples: wrote " << outputs.size() << " files to " << args.out << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"covert / wiretap secret-key regions and coding simulation"};
    app.require_subcommand(1);

    RegionCskArgs rc;
    CLI::App* c1 = app.add_subcommand("region-csk", "CSK inner/outer rate-region boundaries");
    c1->add_option("--channel", rc.channel, "channel-pair JSON file")->required();
    c1->add_option("--out", rc.out, "output directory");
    c1->add_option("--grid", rc.grid, "number of rho grid points")
        ->check(CLI::Range(std::size_t(2), std::size_t(1000000)));
    c1->add_option("--samples", rc.samples, "envelope discretization samples");

    RegionWskArgs rw;
    CLI::App* c2 = app.add_subcommand("region-wsk", "WSK inner/outer rate-region boundaries");
    c2->add_option("--channel", rw.channel, "channel-pair JSON file")->required();
    c2->add_option("--out", rw.out, "output directory");
    c2->add_option("--grid", rw.grid, "per-user Bernoulli grid points")
        ->check(CLI::Range(std::size_t(2), std::size_t(100000)));
    c2->add_option("--samples", rw.samples, "envelope discretization samples");

    VerifyArgs va;
    CLI::App* c3 =
        app.add_subcommand("verify-expansions", "exact small-alpha expansion verification");
    c3->add_option("--channel", va.channel, "channel-pair JSON file")->required();
    c3->add_option("--out", va.out, "output directory");
    c3->add_option("--rho", va.rho, "weight split rho1 or rho1,rho2");
    c3->add_option("--alphas", va.alphas, "alpha grid")->delimiter(',');
    c3->add_option("--ratio-cap", va.ratio_cap, "bounded-ratio acceptance factor");

    SimulateArgs sa;
    CLI::App* c4 =
        app.add_subcommand("simulate", "auxiliary-scheme and protocol simulation");
    c4->add_option("--channel", sa.channel, "channel-pair JSON file")->required();
    c4->add_option("--out", sa.out, "output directory");
    c4->add_option("--rho", sa.rho, "weight split rho1 or rho1,rho2");
    c4->add_option("--alpha", sa.alpha, "per-use amplitude");
    c4->add_option("--n", sa.n, "block length")->check(CLI::Range(1, 64));
    c4->add_option("--mu1", sa.mu1, "reliability slack");
    c4->add_option("--mu2", sa.mu2, "resolvability slack");
    c4->add_option("--mu3", sa.mu3, "source-simulation slack");
    c4->add_option("--g", sa.g, "per-user G (0: from the rate plan)");
    c4->add_option("--m", sa.m, "per-user M");
    c4->add_option("--nrand", sa.nrand, "per-user N");
    c4->add_option("--trials", sa.trials, "Monte Carlo trials")
        ->check(CLI::Range(1L, 1000000000L));
    c4->add_option("--seed", sa.seed, "RNG seed (omit to draw one)");
    c4->add_option("--mode", sa.mode, "auto | exact | mc")
        ->check(CLI::IsMember({"auto", "exact", "mc"}));
    c4->add_option("--decoder", sa.decoder, "key-posterior | joint-ml")
        ->check(CLI::IsMember({"key-posterior", "joint-ml"}));
    c4->add_flag("--decay", sa.decay, "run the block-length decay study");
    c4->add_option("--n-list", sa.n_list, "decay block lengths")->delimiter(',');
    c4->add_option("--codebooks", sa.codebooks, "decay ensemble size")
        ->check(CLI::Range(1, 10000));

    BoundsArgs ba;
    CLI::App* c5 = app.add_subcommand("bounds", "non-asymptotic bound evaluation");
    c5->add_option("--channel", ba.channel, "channel-pair JSON file")->required();
    c5->add_option("--out", ba.out, "output directory");
    c5->add_option("--rho", ba.rho, "weight split rho1 or rho1,rho2");
    c5->add_option("--alpha", ba.alpha, "per-use amplitude");
    c5->add_option("--n-list", ba.n_list, "block lengths")->delimiter(',');
    c5->add_option("--mu1", ba.mu1, "reliability slack");
    c5->add_option("--mu2", ba.mu2, "resolvability slack");
    c5->add_option("--mu3", ba.mu3, "source-simulation slack");
    c5->add_option("--g", ba.g, "per-user G");
    c5->add_option("--m", ba.m, "per-user M");
    c5->add_option("--nrand", ba.nrand, "per-user N");

    ExamplesArgs ea;
    CLI::App* c6 = app.add_subcommand(
        "examples", "regenerate the numerical-example channel files and their outputs");
    c6->add_option("--out", ea.out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (c1->parsed()) return cmd_region_csk(rc);
        if (c2->parsed()) return cmd_region_wsk(rw);
        if (c3->parsed()) return cmd_verify_expansions(va);
        if (c4->parsed()) return cmd_simulate(sa);
        if (c5->parsed()) return cmd_bounds(ba);
        if (c6->parsed()) return cmd_examples(ea);
    } catch (const InfeasiblePlan& e) {
        std::cerr << "infeasible plan: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const BudgetExceeded& e) {
        std::cerr << "budget exceeded: " << e.what() << " (required " << e.required_terms
                  << " terms; COVERTKEY_BUDGET overrides)\n";
        return kExitBudget;
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const EmptyRegion& e) {
        std::cerr << "empty region: " << e.what() << "\n";
        return kExitValidation;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
