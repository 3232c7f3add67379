#include "gstab/harness.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "gstab/detect.hpp"
#include "gstab/errors.hpp"
#include "gstab/experiment.hpp"
#include "gstab/format.hpp"

namespace gstab {

using json = nlohmann::ordered_json;

namespace {

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json params_json(const StabilityParams& s) {
    return json{{"kind", to_string(s.kind)},
                {"basis", s.basis == NormBasis::segment ? "segment_norm" : "initial_moment"},
                {"M", num(s.M)},
                {"lambda", num(s.lambda)},
                {"d", num(s.d)},
                {"log_M", num(s.log_M)},
                {"log_d", std::isfinite(s.log_d) ? json(s.log_d) : json(nullptr)}};
}

json cert_json(const CertReport& r) {
    json inter = json::object(), log_inter = json::object();
    for (const auto& [k, v] : r.intermediates) inter[k] = num(v);
    for (const auto& [k, v] : r.log_intermediates) log_inter[k] = std::isfinite(v) ? json(v) : json(nullptr);
    json out{{"direction", to_string(r.direction)},
             {"inputs",
              {{"p", r.model.p},
               {"L", r.model.L},
               {"L_hat", r.model.L_hat},
               {"sigma_lo", r.model.sigma_lo},
               {"sigma_hi", r.model.sigma_hi},
               {"tau", r.tau},
               {"step", r.step},
               {"delta_conf", r.delta_conf},
               {"norm_ratio", r.norm_ratio},
               {"params", params_json(r.input)}}},
             {"T", r.T},
             {"threshold_name", r.threshold_name},
             {"threshold", num(r.threshold)},
             {"log_threshold", num(r.log_threshold)},
             {"applicable", r.applicable},
             {"output", r.output ? params_json(*r.output) : json(nullptr)},
             {"intermediates", inter},
             {"log_intermediates", log_inter},
             {"note", r.note}};
    return out;
}

json curve_summary(const MomentCurve& c) {
    double max_v = 0.0, max_se = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        max_v = std::max(max_v, c.values[i]);
        max_se = std::max(max_se, c.std_error[i]);
    }
    return json{{"points", c.size()},
                {"initial", num(c.values.front())},
                {"final", num(c.values.back())},
                {"max", num(max_v)},
                {"max_stderr", num(max_se)}};
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

class Writer {
public:
    explicit Writer(std::string dir) : dir_(std::move(dir)) {
        if (dir_.empty()) return;
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory '" + dir_ + "': " + ec.message());
    }

    void curve(const std::string& name, const MomentCurve& c) {
        if (dir_.empty()) return;
        std::ostringstream os;
        write_curve_csv(os, c);
        file("curve_" + name + ".csv", os.str());
    }

    void file(const std::string& name, const std::string& content) {
        if (dir_.empty()) return;
        const auto path = (std::filesystem::path(dir_) / name).string();
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + path + "' for writing");
        out << content;
        out.close();
        if (!out) throw IoError("failed writing '" + path + "'");
        files_.push_back(path);
    }

    const std::vector<std::string>& files() const { return files_; }

private:
    std::string dir_;
    std::vector<std::string> files_;
};

struct Context {
    const ExperimentConfig& cfg;
    CoefficientSystem sys;
    InitialSegment xi;
    std::size_t workers;
    ModelConstants mc;

    Context(const ExperimentConfig& c, std::size_t w)
        : cfg(c), sys(c.build_system()), xi(c.initial_data()), workers(w),
          mc{c.p, sys.lipschitz(), sys.growth(), c.sigma_lo, c.sigma_hi} {}

    CoupledSetup setup() const {
        CoupledSetup s;
        s.system = &sys;
        s.gp = cfg.gparams();
        s.grid = cfg.grid();
        s.xi = xi;
        s.p = cfg.p;
        s.scenarios = cfg.scenarios;
        s.paths = cfg.paths_per_scenario;
        s.seed = cfg.seed;
        s.refine_factor = cfg.refine_factor;
        s.magnitude_cap = cfg.magnitude_cap;
        s.workers = workers;
        return s;
    }

    double seg_norm() const { return segment_norm(xi, cfg.p); }
    double init_moment() const { return pow_norm(xi.at(0), cfg.p); }
    double norm_for(SystemKind k) const {
        return (k == SystemKind::sdde || k == SystemKind::em_sdde) ? seg_norm() : init_moment();
    }
};

const MomentCurve& curve_for(const CoupledCurves& c, SystemKind k) {
    switch (k) {
        case SystemKind::sdde: return c.x;
        case SystemKind::sde: return c.y;
        case SystemKind::em_sde: return c.Y;
        case SystemKind::em_sdde: return c.X;
    }
    return c.x;
}

json fit_json(const FitResult& f) {
    return json{{"verdict", f.verdict},
                {"decaying", f.decaying},
                {"lambda_hat", num(f.lambda_hat)},
                {"M_hat", num(f.M_hat)},
                {"d_hat", num(f.d_hat)},
                {"r_squared", num(f.r_squared)},
                {"M_inflation", num(f.M_inflation)},
                {"d_inflation", num(f.d_inflation)},
                {"backfit_iterations", f.iterations},
                {"params", f.params ? params_json(*f.params) : json(nullptr)}};
}

json envelope_json(const EnvelopeCheck& e, const MomentCurve& c) {
    return json{{"holds", e.holds},
                {"max_violation", num(e.max_violation)},
                {"worst_time", c.times.empty() ? json(nullptr) : json(c.times[e.worst_index])}};
}

StabilityParams configured_params(const ExperimentConfig& cfg) {
    return StabilityParams::make(system_kind_from_string(cfg.cert_start), cfg.cert_M, cfg.cert_lambda_per_time,
                                 cfg.cert_d);
}

CertReport single_transfer(const StabilityParams& in, const Context& ctx) {
    const auto& cfg = ctx.cfg;
    switch (direction_from(in.kind)) {
        case Direction::sdde_to_sde:
            return transfer_sdde_to_sde(in, ctx.mc, cfg.cert_tau(), cfg.delta_conf, cfg.cert_norm_ratio);
        case Direction::sde_to_emsde:
            return transfer_sde_to_emsde(in, ctx.mc, cfg.cert_tau(), cfg.cert_step(), cfg.delta_conf);
        case Direction::emsde_to_emsdde:
            return transfer_emsde_to_emsdde(in, ctx.mc, cfg.cert_tau(), cfg.delta_conf);
        case Direction::emsdde_to_sdde:
            return transfer_emsdde_to_sdde(in, ctx.mc, cfg.cert_tau(), cfg.cert_step(), cfg.delta_conf);
    }
    throw std::logic_error("unreachable");
}

ChainInputs chain_inputs(const Context& ctx, double norm_ratio) {
    return ChainInputs{ctx.mc, ctx.cfg.cert_tau(), ctx.cfg.cert_step(), ctx.cfg.delta_conf, norm_ratio};
}

}  // namespace

std::string cert_report_json(const CertReport& r) { return cert_json(r).dump(); }

ExitCode exit_code_for(const std::exception_ptr& e) {
    try {
        std::rethrow_exception(e);
    } catch (const ConfigError&) {
        return ExitCode::config;
    } catch (const IntegrationError&) {
        return ExitCode::integration;
    } catch (const IoError&) {
        return ExitCode::io;
    } catch (const std::invalid_argument&) {
        return ExitCode::invalid_argument;
    } catch (const std::out_of_range&) {
        return ExitCode::invalid_argument;
    } catch (...) {
        return ExitCode::internal;
    }
}

RunOutcome run(const ExperimentConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    Context ctx(cfg, std::max<std::size_t>(opts.workers, 1));
    Writer out(opts.out_dir);
    ExitCode code = ExitCode::ok;

    json report;
    report["tool"] = "gstab";
    report["version"] = GSTAB_VERSION;
    report["pipeline"] = cfg.pipeline;
    report["seed"] = cfg.seed;
    report["timestamp"] = utc_timestamp();
    json echo = json::object();
    const Config effective = cfg.to_config();
    for (const auto& [k, v] : effective.entries()) echo[k] = v;
    report["config"] = echo;

    json model{{"system", ctx.sys.name()},
               {"dimension", ctx.sys.dim()},
               {"L", ctx.mc.L},
               {"L_hat", ctx.mc.L_hat},
               {"segment_norm", ctx.seg_norm()},
               {"initial_moment", ctx.init_moment()}};
    if (cfg.h1_samples > 0) {
        const auto h1 = validate_h1(ctx.sys, cfg.h1_samples, cfg.seed);
        model["h1"] = json{{"samples", h1.samples}, {"max_ratio", h1.max_ratio}, {"passed", h1.passed}};
        if (!h1.passed) throw ConfigError("Lipschitz check failed for system '" + ctx.sys.name() + "': " + h1.diagnostic);
    }
    report["model"] = model;

    json results = json::object();
    const std::string& pipe = cfg.pipeline;

    if (pipe == "simulate" || pipe == "fit" || pipe == "compare") {
        const auto curves = simulate_coupled(ctx.setup());
        const std::pair<const char*, const MomentCurve*> named[] = {
            {"x", &curves.x},           {"X", &curves.X},           {"y", &curves.y},
            {"Y", &curves.Y},           {"delay_x", &curves.delay_x}, {"delay_X", &curves.delay_X},
            {"gap_x_y", &curves.gap_x_y}, {"gap_y_Y", &curves.gap_y_Y}, {"gap_X_Y", &curves.gap_X_Y},
            {"gap_x_X", &curves.gap_x_X}};
        json summary = json::object();
        for (const auto& [name, c] : named) {
            const bool gap = std::string(name).rfind("gap_", 0) == 0;
            if (gap && pipe != "compare") continue;
            summary[name] = curve_summary(*c);
            out.curve(name, *c);
        }
        results["curves"] = summary;

        if (pipe == "fit") {
            const std::string& t = cfg.fit_target;
            const SystemKind kind = t == "x" ? SystemKind::sdde
                                    : t == "X" ? SystemKind::em_sdde
                                    : t == "y" ? SystemKind::sde
                                               : SystemKind::em_sde;
            const auto& c = curve_for(curves, kind);
            const auto fit = fit_practical_stability(c, ctx.norm_for(kind), cfg.fit, kind);
            json f = fit_json(fit);
            f["target"] = t;
            if (fit.params) f["envelope"] = envelope_json(verify_envelope(c, *fit.params, ctx.norm_for(kind)), c);
            results["fit"] = f;
        }

        if (pipe == "compare") {
            const auto fit = fit_practical_stability(curves.x, ctx.seg_norm(), cfg.fit, SystemKind::sdde);
            results["fit"] = fit_json(fit);
            if (!fit.params) {
                results["chain"] = json::array();
                results["verdict"] = "start curve shows no practical exponential decay; chain not attempted";
                code = ExitCode::inapplicable;
            } else {
                const double ratio = ctx.init_moment() > 0.0 ? ctx.seg_norm() / ctx.init_moment() : 1.0;
                const auto reports = transfer_chain(*fit.params, chain_inputs(ctx, std::max(ratio, 1.0)));
                json chain = json::array();
                bool all = true;
                for (const auto& r : reports) {
                    json item = cert_json(r);
                    if (r.output) {
                        const auto& c = curve_for(curves, r.output->kind);
                        item["envelope_check"] =
                            envelope_json(verify_envelope(c, *r.output, ctx.norm_for(r.output->kind)), c);
                    }
                    all = all && r.applicable;
                    chain.push_back(item);
                }
                results["chain"] = chain;
                if (!all) code = ExitCode::inapplicable;
            }
        }
    } else if (pipe == "certify") {
        const auto r = single_transfer(configured_params(cfg), ctx);
        results["certificate"] = cert_json(r);
        if (!r.applicable) code = ExitCode::inapplicable;
    } else if (pipe == "chain") {
        const auto reports = transfer_chain(configured_params(cfg), chain_inputs(ctx, cfg.cert_norm_ratio));
        json chain = json::array();
        bool all = true;
        for (const auto& r : reports) {
            chain.push_back(cert_json(r));
            all = all && r.applicable;
        }
        results["chain"] = chain;
        results["complete"] = all && reports.size() == 4;
        if (!all) code = ExitCode::inapplicable;
    } else if (pipe == "convergence") {
        const auto st = convergence_study(ctx.setup(), cfg.convergence_levels, cfg.convergence_reference_factor);
        json levels = json::array();
        std::string csv = "step,gap_y_Y,stderr_y_Y,gap_x_X,stderr_x_X\n";
        for (std::size_t l = 0; l < st.steps.size(); ++l) {
            levels.push_back(json{{"step", st.steps[l]},
                                  {"gap_y_Y", st.gap_y_Y[l]},
                                  {"stderr_y_Y", st.stderr_y_Y[l]},
                                  {"gap_x_X", st.gap_x_X[l]},
                                  {"stderr_x_X", st.stderr_x_X[l]}});
            csv += format_double(st.steps[l]) + "," + format_double(st.gap_y_Y[l]) + "," +
                   format_double(st.stderr_y_Y[l]) + "," + format_double(st.gap_x_X[l]) + "," +
                   format_double(st.stderr_x_X[l]) + "\n";
        }
        out.file("convergence.csv", csv);
        results["levels"] = levels;
        results["slope_y_Y"] = num(st.slope_y_Y);
        results["slope_x_X"] = num(st.slope_x_X);
    }

    report["results"] = results;
    report["status"] = code == ExitCode::ok ? "ok" : "inapplicable";
    report["exit_code"] = static_cast<int>(code);

    RunOutcome outcome;
    outcome.code = code;
    outcome.report_json = report.dump(2) + "\n";
    out.file("report.json", outcome.report_json);
    outcome.files = out.files();
    return outcome;
}

}  // namespace gstab
