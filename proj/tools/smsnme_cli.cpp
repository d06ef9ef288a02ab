// smsnme: simulate, fit, compare and diagnose mixture measurement-error models.

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "smsnme/diagnostics.hpp"
#include "smsnme/errors.hpp"
#include "smsnme/io.hpp"
#include "smsnme/model_selection.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace smsnme;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct McmcFlags {
    std::size_t iterations = McmcConfig{}.iterations;
    std::size_t burn_in = McmcConfig{}.burn_in;
    std::size_t thin = McmcConfig{}.thin;
    std::uint64_t seed = 1;
    std::vector<std::string> prior;

    McmcConfig config() const {
        McmcConfig c;
        c.iterations = iterations;
        c.burn_in = burn_in;
        c.thin = thin;
        c.seed = seed;
        c.validate();
        return c;
    }
};

void add_mcmc_flags(CLI::App *cmd, McmcFlags &f) {
    cmd->add_option("--iters", f.iterations, "Total Gibbs sweeps")->capture_default_str();
    cmd->add_option("--burnin", f.burn_in, "Sweeps discarded before storing")->capture_default_str();
    cmd->add_option("--thin", f.thin, "Store every k-th sweep after burn-in")->capture_default_str();
    cmd->add_option("--seed", f.seed, "Master random seed")->capture_default_str();
    cmd->add_option("--prior", f.prior,
                    "Prior override key=value (e, g, h, l, m, kappa, lambda0, lambda1, phi_sl, "
                    "psi_sl, rho0, rho1, tau0, tau1, normal_var, alpha_var, beta_var, mu_var, "
                    "delta_var)");
}

PriorSpec parse_prior(const std::vector<std::string> &overrides) {
    PriorSpec p;
    for (const auto &item : overrides) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw InputError("prior override '" + item + "' is not key=value");
        }
        const std::string key = item.substr(0, eq);
        double v = 0.0;
        try {
            std::size_t used = 0;
            v = std::stod(item.substr(eq + 1), &used);
            if (used != item.size() - eq - 1) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception &) {
            throw InputError("prior override '" + item + "' has a non-numeric value");
        }
        std::map<std::string, double *> scalars{
            {"e", &p.e},           {"g", &p.g},           {"h", &p.h},
            {"l", &p.l},           {"m", &p.m},           {"lambda0", &p.lambda0},
            {"lambda1", &p.lambda1}, {"phi_sl", &p.phi_sl}, {"psi_sl", &p.psi_sl},
            {"rho0", &p.rho0},     {"rho1", &p.rho1},     {"tau0", &p.tau0},
            {"tau1", &p.tau1}};
        std::map<std::string, std::vector<NormalPrior *>> variances{
            {"normal_var", {&p.alpha, &p.beta, &p.mu, &p.delta}},
            {"alpha_var", {&p.alpha}},
            {"beta_var", {&p.beta}},
            {"mu_var", {&p.mu}},
            {"delta_var", {&p.delta}}};
        if (auto it = scalars.find(key); it != scalars.end()) {
            *it->second = v;
        } else if (auto vt = variances.find(key); vt != variances.end()) {
            for (NormalPrior *np : vt->second) {
                np->variance = Vector::Constant(1, v);
            }
        } else if (key == "kappa") {
            p.kappa = Vector::Constant(1, v);
        } else {
            throw InputError("unknown prior key '" + key + "'");
        }
    }
    try {
        p.validate();
    } catch (const ParameterError &e) {
        throw InputError(e.what());
    }
    return p;
}

fs::path require_out(const std::string &out) {
    if (out.empty()) {
        throw InputError("no output directory: pass --out or set SMSNME_OUT_DIR");
    }
    fs::create_directories(out);
    return fs::path(out);
}

template <class Writer> void write_file(const fs::path &path, Writer &&writer) {
    std::ostringstream buf;
    writer(buf);
    atomic_write(path, buf.str());
    std::cout << "wrote " << path.string() << '\n';
}

void write_manifest(const fs::path &dir, const json &manifest) {
    write_file(dir / "manifest.json", [&](std::ostream &o) { o << manifest.dump(2) << '\n'; });
}

json dic_json(const DicReport &r) {
    return {{"dic_robust", r.dic_robust}, {"dic_plugin", r.dic_plugin},       {"tau_d", r.tau_d},
            {"tau_d_plugin", r.tau_d_plugin}, {"mean_deviance", r.mean_deviance},
            {"loglik_at_mean", r.loglik_at_mean}};
}

// --- simulate --------------------------------------------------------------

struct SimulateOpts {
    std::string preset;
    std::size_t n = 500;
    std::uint64_t seed = 1;
    std::string out;
};

void run_simulate(const SimulateOpts &o) {
    Rng rng = make_stream(o.seed, 0);
    std::optional<SimulatedData> sim;
    if (o.preset == "sim2-nig") {
        sim = simulate_fmnig_me(sim2_settings(), o.n, rng);
    } else if (o.preset.rfind("sim1-", 0) == 0) {
        const Family family = family_from_code(o.preset.substr(5));
        sim = simulate_me(sim1_theta(family), o.n, rng);
    } else {
        throw InputError("unknown preset '" + o.preset + "' (sim1-<model> or sim2-nig)");
    }
    const fs::path dir = require_out(o.out);
    const fs::path data_path = dir / "data.csv";
    write_file(data_path, [&](std::ostream &s) { write_dataset_csv(sim->data, s); });
    write_file(dir / "latents.csv", [&](std::ostream &s) { write_latents_csv(sim->latents, s); });
    write_manifest(dir, {{"command", "simulate"},
                         {"preset", o.preset},
                         {"n", o.n},
                         {"seed", o.seed},
                         {"data_checksum", file_checksum(data_path)}});
}

// --- fit -------------------------------------------------------------------

struct FitOpts {
    std::string data;
    std::string model = "fmsn";
    int groups = 2;
    bool no_relabel = false;
    McmcFlags mcmc;
    std::string out;
};

void run_fit(const FitOpts &o) {
    const Family family = family_from_code(o.model);
    const PriorSpec prior = parse_prior(o.mcmc.prior);
    const McmcConfig config = o.mcmc.config();
    const Dataset data = read_dataset_csv(fs::path(o.data));
    const fs::path dir = require_out(o.out);
    Chain chain = gibbs_fit(data, o.groups, family, prior, config);
    if (!o.no_relabel) {
        chain = relabel_chain(chain);
    }
    const DicReport dic = dic_report(chain, data);
    write_file(dir / "chain.csv", [&](std::ostream &s) { write_chain_csv(chain, s); });
    write_file(dir / "latents.csv", [&](std::ostream &s) { write_latent_summary_csv(chain, s); });
    write_file(dir / "summary.csv", [&](std::ostream &s) { write_summary_csv(chain, s); });
    write_manifest(dir, {{"command", "fit"},
                         {"model", model_code(family)},
                         {"G", o.groups},
                         {"data", o.data},
                         {"data_checksum", file_checksum(o.data)},
                         {"config", to_json(config)},
                         {"prior", to_json(prior)},
                         {"relabeled", chain.relabeled},
                         {"stored_draws", chain.size()},
                         {"nu_acceptance", chain.stats.nu_acceptance},
                         {"tau_acceptance", chain.stats.tau_acceptance},
                         {"dic", dic_json(dic)}});
}

// --- compare ---------------------------------------------------------------

struct CompareOpts {
    std::string data;
    std::vector<std::string> models;
    std::vector<std::string> chains;
    int groups = 1;
    McmcFlags mcmc;
    std::string out;
};

struct ModelRequest {
    Family family;
    int groups;
};

ModelRequest parse_model_entry(const std::string &entry, int default_groups) {
    const auto colon = entry.find(':');
    ModelRequest r{family_from_code(entry.substr(0, colon)), default_groups};
    if (colon != std::string::npos) {
        try {
            r.groups = std::stoi(entry.substr(colon + 1));
        } catch (const std::exception &) {
            throw InputError("bad component count in '" + entry + "'");
        }
    }
    return r;
}

json read_json(const fs::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception &e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

Chain load_fitted_chain(const fs::path &dir) {
    const json manifest = read_json(dir / "manifest.json");
    if (manifest.value("command", "") != "fit") {
        throw InputError(dir.string() + " is not a fit output directory");
    }
    const Family family = family_from_code(manifest.at("model").get<std::string>());
    std::ifstream in(dir / "chain.csv");
    if (!in) {
        throw InputError("cannot open " + (dir / "chain.csv").string());
    }
    Chain chain = read_chain_csv(in, family);
    chain.relabeled = manifest.value("relabeled", false);
    return chain;
}

void run_compare(const CompareOpts &o) {
    if (o.models.empty() && o.chains.empty()) {
        throw InputError("compare needs --models or --chains");
    }
    const Dataset data = read_dataset_csv(fs::path(o.data));
    const PriorSpec prior = parse_prior(o.mcmc.prior);
    const McmcConfig base = o.mcmc.config();
    std::vector<ModelRequest> requests;
    for (const auto &m : o.models) {
        requests.push_back(parse_model_entry(m, o.groups));
    }
    const fs::path dir = require_out(o.out);

    std::vector<ComparisonRow> rows(requests.size());
    const auto count = static_cast<long>(requests.size());
    long failed = -1;
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (long k = 0; k < count; ++k) {
        try {
            McmcConfig cfg = base;
            cfg.stream = static_cast<std::uint64_t>(k);
            const auto &req = requests[static_cast<std::size_t>(k)];
            const Chain chain =
                relabel_chain(gibbs_fit(data, req.groups, req.family, prior, cfg));
            rows[static_cast<std::size_t>(k)] = {model_label(req.family), req.groups,
                                                 dic_report(chain, data)};
        } catch (...) {
#pragma omp critical(smsnme_compare_failure)
            if (failed < 0 || k < failed) {
                failed = k;
                failure = std::current_exception();
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    for (const auto &c : o.chains) {
        const Chain chain = load_fitted_chain(c);
        rows.push_back({model_label(chain.family), chain.groups, dic_report(chain, data)});
    }
    write_file(dir / "comparison.csv", [&](std::ostream &s) { write_comparison_csv(rows, s); });
    write_manifest(dir, {{"command", "compare"},
                         {"data", o.data},
                         {"data_checksum", file_checksum(o.data)},
                         {"models", o.models},
                         {"chains", o.chains},
                         {"default_G", o.groups},
                         {"config", to_json(base)},
                         {"prior", to_json(prior)}});
}

// --- diagnose --------------------------------------------------------------

struct DiagnoseOpts {
    std::string data;
    bool ppc = false;
    std::string chain;
    bool dclone = false;
    std::vector<std::size_t> levels{1, 2, 4, 8, 16, 32};
    std::string model = "fmsn";
    int groups = 2;
    McmcFlags mcmc;
    std::string out;
};

void run_diagnose(const DiagnoseOpts &o) {
    if (!o.ppc && !o.dclone) {
        throw InputError("diagnose needs --ppc and/or --dclone");
    }
    if (o.ppc && o.chain.empty()) {
        throw InputError("--ppc needs --chain <fit output directory>");
    }
    const Dataset data = read_dataset_csv(fs::path(o.data));
    const fs::path dir = require_out(o.out);
    json manifest{{"command", "diagnose"},
                  {"data", o.data},
                  {"data_checksum", file_checksum(o.data)},
                  {"seed", o.mcmc.seed}};
    if (o.ppc) {
        const Chain chain = load_fitted_chain(o.chain);
        const PpcReport report = ppc_pvalue(chain, data, o.mcmc.seed);
        write_file(dir / "ppc.csv", [&](std::ostream &s) { write_ppc_csv(report, s); });
        manifest["ppc"] = {{"chain", o.chain}, {"p_value", report.p_value}, {"draws", report.draws}};
        std::cout << "p_value " << format_double(report.p_value) << '\n';
    }
    if (o.dclone) {
        const Family family = family_from_code(o.model);
        const PriorSpec prior = parse_prior(o.mcmc.prior);
        const McmcConfig config = o.mcmc.config();
        const CloneReport report = data_clone(data, o.groups, family, prior, config, o.levels);
        write_file(dir / "dclone.csv", [&](std::ostream &s) { write_clone_csv(report, s); });
        manifest["dclone"] = {{"model", model_code(family)}, {"G", o.groups},
                              {"levels", o.levels},          {"omitted", report.omitted},
                              {"config", to_json(config)},   {"prior", to_json(prior)}};
    }
    write_manifest(dir, manifest);
}

void add_out(CLI::App *cmd, std::string &out) {
    cmd->add_option("--out", out, "Output directory")->envname("SMSNME_OUT_DIR");
}

void add_model(CLI::App *cmd, std::string &model, int &groups) {
    cmd->add_option("--model", model, "fmn, fmt, fmsl, fmcn, fmsn, fmst, fmssl or fmscn")
        ->capture_default_str();
    cmd->add_option("--g", groups, "Number of mixture components")
        ->check(CLI::Range(1, 255))
        ->capture_default_str();
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Bayesian measurement-error regression with SMSN mixture covariates"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value file; command-line flags take precedence");

    SimulateOpts sim;
    auto *simulate = app.add_subcommand("simulate", "Simulate a dataset from a built-in preset");
    simulate->add_option("--preset", sim.preset, "sim1-<model> or sim2-nig")->required();
    simulate->add_option("--n", sim.n, "Sample size")->check(CLI::PositiveNumber)->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Random seed")->capture_default_str();
    add_out(simulate, sim.out);

    FitOpts fit;
    auto *fit_cmd = app.add_subcommand("fit", "Run the Gibbs sampler on a dataset");
    fit_cmd->add_option("--data", fit.data, "Dataset CSV")->required();
    add_model(fit_cmd, fit.model, fit.groups);
    fit_cmd->add_flag("--no-relabel", fit.no_relabel, "Keep the raw component labels");
    add_mcmc_flags(fit_cmd, fit.mcmc);
    add_out(fit_cmd, fit.out);

    CompareOpts cmp;
    auto *compare = app.add_subcommand("compare", "DIC comparison table");
    compare->add_option("--data", cmp.data, "Dataset CSV")->required();
    compare->add_option("--models", cmp.models, "Models to fit, each <model> or <model>:<G>")
        ->delimiter(',');
    compare->add_option("--chains", cmp.chains, "Fit output directories to include")->delimiter(',');
    compare->add_option("--g", cmp.groups, "Components for entries without :<G>")
        ->check(CLI::Range(1, 255))
        ->capture_default_str();
    add_mcmc_flags(compare, cmp.mcmc);
    add_out(compare, cmp.out);

    DiagnoseOpts diag;
    auto *diagnose = app.add_subcommand("diagnose", "Posterior predictive check and data cloning");
    diagnose->add_option("--data", diag.data, "Dataset CSV")->required();
    diagnose->add_flag("--ppc", diag.ppc, "Bayesian p-value for a fitted chain");
    diagnose->add_option("--chain", diag.chain, "Fit output directory (for --ppc)");
    diagnose->add_flag("--dclone", diag.dclone, "Data-cloning eigenvalue curve");
    diagnose->add_option("--levels", diag.levels, "Clone levels")->delimiter(',')->capture_default_str();
    add_model(diagnose, diag.model, diag.groups);
    add_mcmc_flags(diagnose, diag.mcmc);
    add_out(diagnose, diag.out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return app.exit(e);
    } catch (const CLI::ParseError &e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*simulate) {
            run_simulate(sim);
        } else if (*fit_cmd) {
            run_fit(fit);
        } else if (*compare) {
            run_compare(cmp);
        } else if (*diagnose) {
            run_diagnose(diag);
        }
    } catch (const NumericalError &e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return EXIT_SUCCESS;
}
