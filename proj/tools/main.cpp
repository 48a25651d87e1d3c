// ntnprs: batch front end for the PRS interference pipeline.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ntnprs/cli.hpp"

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-c,--config", c.config, "configuration file (INI)");
  cmd->add_option("-o,--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--override", c.overrides, "key=value or section.key=value, applied after the file");
  cmd->add_option("--seed", c.seed, "master seed (overrides the config)");
}

ntnprs::cli::Context context(const Common& c) {
  ntnprs::cli::Context ctx;
  ctx.config = ntnprs::cli::resolve_config(c.config, c.overrides, c.seed);
  ctx.overrides = c.overrides;
  ctx.out = c.out;
  ctx.log = &std::cout;
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo model of 5G PRS interference from LEO satellites"};
  app.require_subcommand(1);

  Common gen_opts, sim_opts, fit_opts, model_opts, ddm_opts, report_opts;
  std::string passes_out, passes_in, samples_in, fit_in;
  ntnprs::cli::DdmRequest ddm_req;

  auto* gen = app.add_subcommand("generate-passes", "write the satellite pass table");
  add_common(gen, gen_opts);
  gen->add_option("--passes", passes_out, "output path (default: <out>/<pass_file>)");

  auto* sim = app.add_subcommand("simulate", "run the campaign and write samples.csv + metadata.json");
  add_common(sim, sim_opts);
  sim->add_option("--passes", passes_in, "pass CSV when pass_source = csv (default: pass_file)");

  auto* fit = app.add_subcommand("fit", "fit the six candidate distributions per configuration");
  add_common(fit, fit_opts);
  fit->add_option("--samples", samples_in, "sample CSV (default: <out>/samples.csv)");

  auto* model = app.add_subcommand("model", "regress GEV parameters against (m, P_TX) per comb size");
  add_common(model, model_opts);
  model->add_option("--fit", fit_in, "fit report (default: <out>/fit_report.json)");

  auto* ddm = app.add_subcommand("ddm", "delay-Doppler map of one snapshot");
  add_common(ddm, ddm_opts);
  ddm->add_option("--user", ddm_req.user_id, "user index on the lattice")->capture_default_str();
  ddm->add_option("-t,--time", ddm_req.t, "epoch in seconds")->capture_default_str();
  ddm->add_option("--reference", ddm_req.reference, "visible-set index of the replica satellite")->capture_default_str();
  ddm->add_option("--csv-halfwidth", ddm_req.csv_halfwidth, "also write a CSV window of +-N lags around its peak");

  auto* report = app.add_subcommand("report", "summarise outputs in <out>/report.md");
  add_common(report, report_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) ntnprs::cli::generate_passes_cmd(context(gen_opts), passes_out);
    if (*sim) ntnprs::cli::simulate_cmd(context(sim_opts), passes_in);
    if (*fit) ntnprs::cli::fit_cmd(context(fit_opts), samples_in);
    if (*model) ntnprs::cli::model_cmd(context(model_opts), fit_in);
    if (*ddm) ntnprs::cli::ddm_cmd(context(ddm_opts), ddm_req);
    if (*report) ntnprs::cli::report_cmd(context(report_opts));
  } catch (const ntnprs::Error& e) {
    std::cerr << "error (" << ntnprs::to_string(e.code()) << "): " << e.what() << '\n';
    return ntnprs::exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
