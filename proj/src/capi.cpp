#include "gstab/gstab.h"

#include <cstring>
#include <exception>
#include <string>

#include "gstab/certify.hpp"
#include "gstab/config.hpp"
#include "gstab/errors.hpp"
#include "gstab/harness.hpp"
#include "gstab/model.hpp"

struct gstab_config {
    gstab::Config cfg;
};

struct gstab_report {
    std::string json;
};

namespace {

thread_local std::string last_error;

gstab_status fail(gstab_status s, const std::string& msg) {
    last_error = msg;
    return s;
}

// Runs f, translating exceptions into status codes.
template <class F>
gstab_status guarded(F&& f) {
    try {
        last_error.clear();
        return f();
    } catch (const std::exception& e) {
        const auto code = gstab::exit_code_for(std::current_exception());
        return fail(static_cast<gstab_status>(code), e.what());
    } catch (...) {
        return fail(GSTAB_ERR_INTERNAL, "unknown error");
    }
}

gstab::SystemKind kind_of(gstab_system_kind k) {
    switch (k) {
        case GSTAB_SDDE: return gstab::SystemKind::sdde;
        case GSTAB_SDE: return gstab::SystemKind::sde;
        case GSTAB_EM_SDDE: return gstab::SystemKind::em_sdde;
        case GSTAB_EM_SDE: return gstab::SystemKind::em_sde;
    }
    throw std::invalid_argument("unknown system kind");
}

gstab_system_kind kind_of(gstab::SystemKind k) {
    switch (k) {
        case gstab::SystemKind::sdde: return GSTAB_SDDE;
        case gstab::SystemKind::sde: return GSTAB_SDE;
        case gstab::SystemKind::em_sdde: return GSTAB_EM_SDDE;
        case gstab::SystemKind::em_sde: return GSTAB_EM_SDE;
    }
    return GSTAB_SDDE;
}

}  // namespace

extern "C" {

const char* gstab_version(void) { return GSTAB_VERSION; }

const char* gstab_last_error(void) { return last_error.c_str(); }

gstab_status gstab_config_load(const char* path, gstab_config** out) {
    return guarded([&] {
        if (!path || !out) return fail(GSTAB_ERR_INVALID_ARGUMENT, "gstab_config_load: null argument");
        *out = new gstab_config{gstab::Config::load(path)};
        return GSTAB_OK;
    });
}

gstab_status gstab_config_parse(const char* text, gstab_config** out) {
    return guarded([&] {
        if (!text || !out) return fail(GSTAB_ERR_INVALID_ARGUMENT, "gstab_config_parse: null argument");
        *out = new gstab_config{gstab::Config::parse(text)};
        return GSTAB_OK;
    });
}

gstab_status gstab_config_set(gstab_config* cfg, const char* key, const char* value) {
    return guarded([&] {
        if (!cfg || !key || !value) return fail(GSTAB_ERR_INVALID_ARGUMENT, "gstab_config_set: null argument");
        cfg->cfg.set(key, value);
        return GSTAB_OK;
    });
}

void gstab_config_free(gstab_config* cfg) { delete cfg; }

gstab_status gstab_run(const gstab_config* cfg, const char* pipeline, const char* out_dir, int workers,
                       gstab_report** out) {
    return guarded([&] {
        if (!cfg || !out) return fail(GSTAB_ERR_INVALID_ARGUMENT, "gstab_run: null argument");
        if (workers < 1) return fail(GSTAB_ERR_INVALID_ARGUMENT, "gstab_run: workers must be >= 1");
        *out = nullptr;
        gstab::Config c = cfg->cfg;
        if (pipeline && *pipeline) c.set("pipeline", pipeline);
        const auto exp = gstab::ExperimentConfig::from(c);
        gstab::RunOptions opts{out_dir ? out_dir : "", static_cast<std::size_t>(workers)};
        auto outcome = gstab::run(exp, opts);
        *out = new gstab_report{std::move(outcome.report_json)};
        if (outcome.code == gstab::ExitCode::inapplicable)
            return fail(GSTAB_INAPPLICABLE, "certificate threshold >= 1; see the report");
        return static_cast<gstab_status>(outcome.code);
    });
}

const char* gstab_report_json(const gstab_report* report) { return report ? report->json.c_str() : nullptr; }

void gstab_report_free(gstab_report* report) { delete report; }

gstab_status gstab_g_function(double a, double sigma_lo, double sigma_hi, double* out) {
    return guarded([&] {
        if (!out) return fail(GSTAB_ERR_INVALID_ARGUMENT, "gstab_g_function: null output");
        *out = gstab::g_function(a, gstab::GParams(sigma_lo, sigma_hi));
        return GSTAB_OK;
    });
}

gstab_status gstab_bdg_constant(double p, double* out) {
    return guarded([&] {
        if (!out) return fail(GSTAB_ERR_INVALID_ARGUMENT, "gstab_bdg_constant: null output");
        *out = gstab::bdg_constant(p);
        return GSTAB_OK;
    });
}

gstab_status gstab_transfer(const gstab_transfer_inputs* in, gstab_transfer_result* out) {
    return guarded([&] {
        if (!in || !out) return fail(GSTAB_ERR_INVALID_ARGUMENT, "gstab_transfer: null argument");
        std::memset(out, 0, sizeof *out);
        const auto params = gstab::StabilityParams::make(kind_of(in->source), in->M, in->lambda, in->d);
        const gstab::ModelConstants mc{in->p, in->L, in->L_hat, in->sigma_lo, in->sigma_hi};
        gstab::CertReport r;
        switch (gstab::direction_from(params.kind)) {
            case gstab::Direction::sdde_to_sde:
                r = gstab::transfer_sdde_to_sde(params, mc, in->tau, in->delta_conf,
                                                in->norm_ratio == 0.0 ? 1.0 : in->norm_ratio);
                break;
            case gstab::Direction::sde_to_emsde:
                r = gstab::transfer_sde_to_emsde(params, mc, in->tau, in->step, in->delta_conf);
                break;
            case gstab::Direction::emsde_to_emsdde:
                r = gstab::transfer_emsde_to_emsdde(params, mc, in->tau, in->delta_conf);
                break;
            case gstab::Direction::emsdde_to_sdde:
                r = gstab::transfer_emsdde_to_sdde(params, mc, in->tau, in->step, in->delta_conf);
                break;
        }
        out->target = kind_of(gstab::target_of(r.direction));
        out->applicable = r.applicable ? 1 : 0;
        out->T = r.T;
        out->threshold = r.threshold;
        out->log_threshold = r.log_threshold;
        if (r.output) {
            out->M = r.output->M;
            out->lambda = r.output->lambda;
            out->d = r.output->d;
            out->log_M = r.output->log_M;
            out->log_d = r.output->log_d;
            return GSTAB_OK;
        }
        return fail(GSTAB_INAPPLICABLE, r.note);
    });
}

}  // extern "C"
