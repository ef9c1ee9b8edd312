#include "qspec/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qspec/qfi.hpp"
#include "qspec/report.hpp"
#include "qspec/scattering.hpp"

namespace qspec
{
namespace
{
namespace fs = std::filesystem;
using nlohmann::json;

struct Options
{
    std::string config_path;
    std::string out_path;
    std::string summary_path;
    std::size_t grid_budget = 0;
    bool verbose = false;
};

struct RunConfig
{
    json doc;
    fs::path base_dir;
    EmitterModel emitter;
    std::size_t grid_budget = kDefaultGridBudget;

    bool has(const char *key) const { return doc.contains(key); }
};

RunConfig load_config(const Options &opt)
{
    if (opt.config_path.empty())
        throw Error(Errc::Config, "--config", "no configuration file given");
    std::ifstream in(opt.config_path);
    if (!in)
        throw Error(Errc::Config, "config_readable", "cannot open " + opt.config_path);
    json doc;
    try
    {
        in >> doc;
    }
    catch (const json::exception &ex)
    {
        throw Error(Errc::Config, "config_json", std::string("not valid JSON: ") + ex.what());
    }
    if (!doc.contains("emitter"))
        throw Error(Errc::Config, "emitter", "configuration lacks the 'emitter' block");
    RunConfig cfg{doc, fs::path(opt.config_path).parent_path(), emitter_from_json(doc.at("emitter")), kDefaultGridBudget};
    if (doc.contains("grid_budget"))
        cfg.grid_budget = doc.at("grid_budget").get<std::size_t>();
    if (opt.grid_budget)
        cfg.grid_budget = opt.grid_budget;
    return cfg;
}

PulseSpec config_pulse(const RunConfig &cfg)
{
    if (!cfg.has("pulse"))
        throw Error(Errc::Config, "pulse", "this command needs a 'pulse' block");
    return pulse_from_json(cfg.doc.at("pulse"), cfg.base_dir);
}

std::vector<ParameterTag> config_parameters(const RunConfig &cfg, bool all_by_default)
{
    std::vector<ParameterTag> out;
    if (cfg.has("parameter"))
    {
        const json &p = cfg.doc.at("parameter");
        if (p.is_array())
            for (const auto &item : p)
                out.push_back(ParameterTag::parse(item.get<std::string>()));
        else
            out.push_back(ParameterTag::parse(p.get<std::string>()));
    }
    else
    {
        out.push_back(ParameterTag::gamma());
        if (all_by_default)
            for (int j = 1; j <= cfg.emitter.dimension(); ++j)
                out.push_back(ParameterTag::detuning(j));
    }
    for (const ParameterTag &t : out)
        validate(cfg.emitter, t);
    return out;
}

template <class T>
std::vector<T> config_list(const RunConfig &cfg, const char *key, std::vector<T> fallback)
{
    if (!cfg.has(key))
        return fallback;
    return cfg.doc.at(key).get<std::vector<T>>();
}

std::string g2(double value, double rate) { return format_double(value * rate * rate); }

struct Output
{
    CsvTable table;
    json summary;
};

Output cmd_bounds(const RunConfig &cfg, const Options &opt)
{
    const EmitterModel &m = cfg.emitter;
    const double kappa = cfg.doc.value("kappa", 1e-3) * m.rate();
    const Regularization reg = parse_regularization(cfg.doc.value("regularization", std::string("lorentzian")));
    Output o;
    o.table.model_hash = model_hash(m);
    o.table.header = {"parameter", "bound_gamma2", "omega_max", "omega_min"};
    o.summary["rows"] = json::array();
    for (const ParameterTag &theta : config_parameters(cfg, true))
    {
        const QfiBound b = qfi_bound(m, theta);
        o.table.add_row({theta.to_string(), g2(b.bound, m.rate()), format_double(b.omega_max), format_double(b.omega_min)});
        json row = {{"parameter", theta.to_string()},
                    {"bound_gamma2", b.bound * m.rate() * m.rate()},
                    {"omega_max", b.omega_max},
                    {"omega_min", b.omega_min},
                    {"min_at_infinity", b.min_at_infinity},
                    {"optimal_pulse", describe(optimal_pulse(m, b, theta, kappa, reg))}};
        if (opt.verbose)
            row["diagnostics"] = to_json(b.extrema);
        o.summary["rows"].push_back(std::move(row));
    }
    if (opt.verbose)
        o.summary["brackets"] = to_json(make_brackets(m));
    return o;
}

Output cmd_qfi(const RunConfig &cfg, const Options &opt)
{
    const EmitterModel &m = cfg.emitter;
    const PulseSpec pulse = config_pulse(cfg);
    const SampledField grid = build_grid(m, pulse, cfg.grid_budget);
    Output o;
    o.table.model_hash = model_hash(m);
    o.table.header = {"parameter", "qfi_gamma2", "bound_gamma2", "saturation"};
    o.summary["pulse"] = describe(pulse);
    o.summary["grid_points"] = grid.size();
    o.summary["rows"] = json::array();
    for (const ParameterTag &theta : config_parameters(cfg, false))
    {
        const QfiResult r = evaluate_qfi(m, grid, theta);
        o.table.add_row({theta.to_string(), g2(r.value, m.rate()), g2(r.bound, m.rate()), format_double(r.saturation)});
        json row = {{"parameter", theta.to_string()},
                    {"qfi_gamma2", r.value * m.rate() * m.rate()},
                    {"bound_gamma2", r.bound * m.rate() * m.rate()},
                    {"saturation", r.saturation}};
        if (opt.verbose)
        {
            const OracleEstimate est = qfi_fidelity_oracle(m, grid, theta);
            row["fidelity_oracle_gamma2"] = est.qfi * m.rate() * m.rate();
            row["fidelity_step_warning"] = est.step_warning;
        }
        o.summary["rows"].push_back(std::move(row));
    }
    return o;
}

Output cmd_sweep_kappa(const RunConfig &cfg, const Options &)
{
    const EmitterModel &m = cfg.emitter;
    const ParameterTag theta = config_parameters(cfg, false).front();
    std::vector<Regularization> regs;
    for (const std::string &r : config_list<std::string>(cfg, "regularizations", {"lorentzian", "gaussian", "rectangular"}))
        regs.push_back(parse_regularization(r));
    const std::vector<double> kappas = config_list<double>(cfg, "kappas", default_kappas());
    for (std::size_t i = 1; i < kappas.size(); ++i)
        if (!(kappas[i] < kappas[i - 1]))
            throw Error(Errc::Config, "kappas_descending", "kappa list must be sorted in descending order");

    const auto rows = sweep_kappa(m, theta, regs, kappas, cfg.grid_budget);
    Output o;
    o.table.model_hash = model_hash(m);
    o.table.header = {"reg", "kappa_over_gamma", "qfi_gamma2"};
    double peak = 0.0;
    for (const KappaRow &r : rows)
    {
        o.table.add_row({to_string(r.reg), format_double(r.kappa_over_gamma), format_double(r.qfi_gamma2)});
        peak = std::max(peak, r.qfi_gamma2);
    }
    o.summary = {{"parameter", theta.to_string()}, {"rows", rows.size()}, {"max_qfi_gamma2", peak},
                 {"bound_gamma2", qfi_bound(m, theta).bound * m.rate() * m.rate()}};
    return o;
}

Output cmd_bandwidth_sweep(const RunConfig &cfg, const Options &)
{
    const EmitterModel &m = cfg.emitter;
    std::vector<PulseFamily> families;
    for (const std::string &f :
         config_list<std::string>(cfg, "families", {"gaussian", "rectangular", "decaying_exp", "rising_exp"}))
        families.push_back(parse_family(f));
    const std::vector<double> bws = config_list<double>(cfg, "bandwidths", default_bandwidths());
    const auto rows = bandwidth_sweep(m, families, bws, cfg.grid_budget);
    Output o;
    o.table.model_hash = model_hash(m);
    o.table.header = {"family", "bandwidth_over_gamma", "qfi_gamma2"};
    for (const BandwidthRow &r : rows)
        o.table.add_row({to_string(r.family), format_double(r.bandwidth_over_gamma), format_double(r.qfi_gamma2)});
    json maxima = json::object();
    for (const auto &[family, row] : family_maxima(rows))
        maxima[to_string(family)] = {{"qfi_gamma2", row.qfi_gamma2}, {"bandwidth_over_gamma", row.bandwidth_over_gamma}};
    o.summary = {{"maxima", maxima}};
    return o;
}

Output cmd_optimal_pulse(const RunConfig &cfg, const Options &opt)
{
    const EmitterModel &m = cfg.emitter;
    const ParameterTag theta = config_parameters(cfg, false).front();
    const double kappa = cfg.doc.value("kappa", 1e-3);
    const Regularization reg = parse_regularization(cfg.doc.value("regularization", std::string("lorentzian")));
    const QfiBound b = qfi_bound(m, theta);
    const PulseSpec pulse = optimal_pulse(m, b, theta, kappa * m.rate(), reg);
    const SampledField grid = build_grid(m, pulse, cfg.grid_budget);
    const double q = qfi_pulse(m, grid, theta);

    Output o;
    o.table.model_hash = model_hash(m);
    o.table.header = {"omega", "re_amp", "im_amp", "weight"};
    for (std::size_t k = 0; k < grid.size(); ++k)
        o.table.add_row({format_double(grid.freqs[k]), format_double(grid.amps[k].real()),
                         format_double(grid.amps[k].imag()), format_double(grid.weights[k])});
    o.summary = {{"parameter", theta.to_string()},
                 {"pulse", pulse_to_json(pulse)},
                 {"description", describe(pulse)},
                 {"qfi_gamma2", q * m.rate() * m.rate()},
                 {"bound_gamma2", b.bound * m.rate() * m.rate()},
                 {"saturation", b.bound > 0.0 ? q / b.bound : 0.0}};
    if (opt.verbose)
        o.summary["diagnostics"] = to_json(b.extrema);
    return o;
}

Output cmd_scatter(const RunConfig &cfg, const Options &)
{
    const EmitterModel &m = cfg.emitter;
    const PulseSpec pulse = config_pulse(cfg);
    Output o;
    o.table.model_hash = model_hash(m);
    if (cfg.doc.value("time_domain", false))
    {
        const double dt = cfg.doc.value("dt", recommended_time_step(m));
        const double t0 = cfg.doc.value("t_start", 0.0);
        const double t1 = cfg.doc.value("t_stop", t0 + 60.0 / m.rate());
        const auto count = static_cast<std::size_t>(std::ceil((t1 - t0) / dt)) + 1;
        const TimeSamples in = sample_time(pulse, t0, dt, count);
        const TimeSamples out = scatter_time(m, in);
        o.table.header = {"t", "re_in", "im_in", "re_out", "im_out"};
        for (std::size_t k = 0; k < count; ++k)
            o.table.add_row({format_double(in.time(k)), format_double(in.values[k].real()),
                             format_double(in.values[k].imag()), format_double(out.values[k].real()),
                             format_double(out.values[k].imag())});
        o.summary = {{"domain", "time"}, {"samples", count}, {"dt", dt},
                     {"norm_in", in.norm_squared()}, {"norm_out", out.norm_squared()}};
        return o;
    }
    const SampledField grid = build_grid(m, pulse, cfg.grid_budget);
    const ScatterResult res = scatter_freq(m, grid);
    o.table.header = {"omega", "re_in", "im_in", "re_out", "im_out", "phase"};
    for (std::size_t k = 0; k < grid.size(); ++k)
        o.table.add_row({format_double(grid.freqs[k]), format_double(grid.amps[k].real()),
                         format_double(grid.amps[k].imag()), format_double(res.out.amps[k].real()),
                         format_double(res.out.amps[k].imag()), format_double(res.phase_curve[k])});
    o.summary = {{"domain", "frequency"}, {"grid_points", grid.size()}, {"norm_error", res.norm_error}};
    return o;
}

std::string hint_for(const Error &e)
{
    switch (e.code())
    {
    case Errc::InvalidModel: return "fix the emitter block so that '" + e.violated() + "' holds";
    case Errc::InvalidPulse: return "check the pulse parameters (widths and rates must be positive)";
    case Errc::InvalidParameter: return "use 'gamma' or 'detuning:J' with 1 <= J <= n";
    case Errc::WindowTooSmall: return "widen the frequency window or drop the explicit window";
    case Errc::WindowInsufficient: return "the emitter spectrum is too wide for the default search margin";
    case Errc::GridTooCoarse: return "reduce 'dt' to at most 0.01/gamma_rate";
    case Errc::ZeroField: return "the pulse has no weight on the frequency grid";
    default: return "see the message above";
    }
}

int exit_code_for(const Error &e)
{
    if (e.is_certification_failure() || e.code() == Errc::PoleProximity)
        return kExitCertification;
    return kExitConfig;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err)
{
    CLI::App app{"Single-photon spectroscopy precision toolkit"};
    app.require_subcommand(1);
    Options opt;

    using Command = std::function<Output(const RunConfig &, const Options &)>;
    const std::vector<std::tuple<std::string, std::string, Command>> commands = {
        {"bounds", "QFI upper bounds for Gamma and every detuning", cmd_bounds},
        {"qfi", "QFI of the configured pulse", cmd_qfi},
        {"sweep-kappa", "QFI of regularized optimal pulses versus kappa/Gamma", cmd_sweep_kappa},
        {"bandwidth-sweep", "QFI of resonant pulse families versus bandwidth", cmd_bandwidth_sweep},
        {"optimal-pulse", "Optimal regularized delta-pair pulse", cmd_optimal_pulse},
        {"scatter", "Scattered pulse in the frequency (or time) domain", cmd_scatter},
    };
    std::vector<CLI::App *> subs;
    for (const auto &[name, help, fn] : commands)
    {
        CLI::App *sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config_path, "JSON configuration file")->required();
        sub->add_option("--out", opt.out_path, "CSV output path (default: stdout)");
        sub->add_option("--summary", opt.summary_path, "JSON summary path (default: stdout when --out is set)");
        sub->add_option("--grid-budget", opt.grid_budget, "minimum number of frequency grid points")
            ->check(CLI::Range(std::size_t{512}, std::size_t{100000000}));
        sub->add_flag("--verbose", opt.verbose, "include optimizer diagnostics in the summary");
        subs.push_back(sub);
    }

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp &)
    {
        out << app.help();
        return kExitOk;
    }
    catch (const CLI::ParseError &e)
    {
        err << "error: " << e.what() << '\n' << app.help();
        return kExitConfig;
    }

    std::size_t chosen = 0;
    while (chosen < subs.size() && !subs[chosen]->parsed())
        ++chosen;
    const auto &[name, help, fn] = commands[chosen];

    try
    {
        const RunConfig cfg = load_config(opt);
        const Output result = fn(cfg, opt);
        json summary = result.summary;
        summary["command"] = name;
        summary["model_hash"] = result.table.model_hash;

        if (opt.out_path.empty())
            write_csv(out, result.table);
        else
        {
            std::ofstream csv(opt.out_path);
            if (!csv)
                throw Error(Errc::Config, "--out", "cannot write " + opt.out_path);
            write_csv(csv, result.table);
        }
        if (!opt.summary_path.empty())
        {
            std::ofstream js(opt.summary_path);
            if (!js)
                throw Error(Errc::Config, "--summary", "cannot write " + opt.summary_path);
            js << summary.dump(2) << '\n';
        }
        else if (!opt.out_path.empty())
            out << summary.dump(2) << '\n';
        return kExitOk;
    }
    catch (const Error &e)
    {
        err << "error: " << (opt.config_path.empty() ? "<no config>" : opt.config_path) << ": [" << to_string(e.code())
            << "] " << e.violated() << ": " << e.what() << "\n  hint: " << hint_for(e) << '\n';
        return exit_code_for(e);
    }
    catch (const json::exception &e)
    {
        err << "error: " << opt.config_path << ": malformed configuration: " << e.what() << '\n';
        return kExitConfig;
    }
    catch (const std::exception &e)
    {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
}

} // namespace qspec
