#include "nqe_capi.h"

#include <exception>
#include <string>

#include <nlohmann/json.hpp>

#include "nqe/experiments.hpp"

struct nqe_session {
  std::string last_error;
};

extern "C" {

const char* nqe_version(void) { return "1.0.0"; }

nqe_session* nqe_session_create(void) {
  try {
    return new nqe_session();
  } catch (...) {
    return nullptr;
  }
}

void nqe_session_destroy(nqe_session* s) { delete s; }

const char* nqe_last_error(const nqe_session* s) {
  return s ? s->last_error.c_str() : "null session";
}

int nqe_run(nqe_session* s, const char* subcommand, const char* config_json,
            const char* out_dir, int workers, int64_t seed_override) {
  if (!s) return NQE_ERR_ARG;
  if (!subcommand || !config_json || !out_dir) {
    s->last_error = "null argument";
    return NQE_ERR_ARG;
  }
  s->last_error.clear();
  try {
    nlohmann::json config = nlohmann::json::parse(config_json);
    nqe::RunContext ctx;
    ctx.out_dir = out_dir;
    ctx.workers = workers;
    if (seed_override >= 0) ctx.seed_override = std::uint64_t(seed_override);
    nqe::run_subcommand(subcommand, config, ctx);
    return NQE_OK;
  } catch (const nlohmann::json::parse_error& e) {
    s->last_error = std::string("config: ") + e.what();
    return NQE_ERR_CONFIG;
  } catch (const nqe::ConfigError& e) {
    s->last_error = e.what();
    return NQE_ERR_CONFIG;
  } catch (const std::exception& e) {
    s->last_error = e.what();
    return NQE_ERR_RUNTIME;
  } catch (...) {
    s->last_error = "unknown error";
    return NQE_ERR_RUNTIME;
  }
}

}  // extern "C"
