// main.cpp — tibsim command-line interface.
//
// Verbs:
//   tibsim simulate reflection|ringdown|kerr   run one experiment, write CSVs
//   tibsim report table1                       run all three, write the summary
//   tibsim plot ...                            render emitted CSVs to SVG
//
// All parameters live in one structured config file (see
// config/device_default.cfg); individual keys can be overridden per run with
// --set section.key=value. Output lands in --out-dir, the TIBSIM_OUT_DIR
// environment variable, or the working directory, in that order.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tibsim/config.hpp"
#include "tibsim/errors.hpp"
#include "tibsim/experiments.hpp"
#include "tibsim/plot.hpp"

namespace {

tibsim::SimulationConfig load_with_overrides(const std::string& config_path,
                                             const std::vector<std::string>& overrides) {
  tibsim::ConfigMap map;
  if (config_path.empty()) {
    map = tibsim::read_config_text(tibsim::default_config_text());
  } else {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) throw tibsim::ConfigError("cannot open config file '" + config_path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    map = tibsim::read_config_text(buf.str());
  }
  for (const std::string& assignment : overrides) tibsim::set_config_key(map, assignment);
  return tibsim::build_config(map);
}

std::string resolve_out_dir(const std::string& flag_value) {
  std::string dir = flag_value;
  if (dir.empty()) {
    const char* env = std::getenv("TIBSIM_OUT_DIR");
    dir = (env != nullptr && env[0] != '\0') ? env : ".";
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw tibsim::ConfigError("cannot create output directory '" + dir + "'");
  return dir;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"closed-loop simulator and parameter-extraction toolkit for a "
               "cavity with a flux-tunable coupler"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir_flag;
  app.add_option("-c,--config", config_path,
                 "config file (default: built-in calibrated device)");
  app.add_option("-s,--set", overrides, "override a config key: section.key=value");
  app.add_option("-o,--out-dir", out_dir_flag,
                 "output directory (default: $TIBSIM_OUT_DIR or '.')");

  CLI::App* simulate = app.add_subcommand("simulate", "run one experiment");
  simulate->require_subcommand(1);
  simulate->fallthrough();
  CLI::App* sim_reflection = simulate->add_subcommand(
      "reflection", "linewidth and reflection depth across the bias grid");
  CLI::App* sim_ringdown = simulate->add_subcommand(
      "ringdown", "decay rate and recovered energy across the bias grid");
  CLI::App* sim_kerr = simulate->add_subcommand(
      "kerr", "resonance shift vs drive power at critical coupling");
  sim_reflection->fallthrough();
  sim_ringdown->fallthrough();
  sim_kerr->fallthrough();

  CLI::App* report = app.add_subcommand("report", "combined reports");
  report->require_subcommand(1);
  report->fallthrough();
  report->add_subcommand("table1",
                         "run all three experiments and write the five-row summary")
      ->fallthrough();

  CLI::App* plot = app.add_subcommand("plot", "render emitted CSVs to an SVG");
  plot->fallthrough();
  std::vector<std::string> plot_inputs;
  std::vector<std::string> plot_labels;
  std::string plot_x, plot_y, plot_output, plot_title, plot_xlabel, plot_ylabel;
  bool plot_logx = false, plot_logy = false, plot_markers = false;
  plot->add_option("-i,--input", plot_inputs, "input CSV (repeat to overlay)")->required();
  plot->add_option("-x,--x-column", plot_x, "column for the x axis")->required();
  plot->add_option("-y,--y-column", plot_y, "column for the y axis")->required();
  plot->add_option("--output", plot_output, "output SVG path")->required();
  plot->add_option("--label", plot_labels, "legend label per input");
  plot->add_option("--title", plot_title, "plot title");
  plot->add_option("--x-label", plot_xlabel, "x axis label");
  plot->add_option("--y-label", plot_ylabel, "y axis label");
  plot->add_flag("--log-x", plot_logx, "logarithmic x axis");
  plot->add_flag("--log-y", plot_logy, "logarithmic y axis");
  plot->add_flag("--markers", plot_markers, "draw point markers instead of lines");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (plot->parsed()) {
      if (plot_labels.size() > plot_inputs.size())
        throw tibsim::ConfigError("more --label values than --input files");
      tibsim::PlotSpec spec;
      for (std::size_t i = 0; i < plot_inputs.size(); ++i) {
        tibsim::PlotSeries series;
        series.csv_path = plot_inputs[i];
        series.x_column = plot_x;
        series.y_column = plot_y;
        series.label = i < plot_labels.size() ? plot_labels[i] : "";
        series.markers = plot_markers;
        spec.series.push_back(series);
      }
      spec.title = plot_title;
      spec.x_label = plot_xlabel;
      spec.y_label = plot_ylabel;
      spec.log_x = plot_logx;
      spec.log_y = plot_logy;
      tibsim::emit_plot(spec, plot_output);
      std::printf("wrote %s\n", plot_output.c_str());
      return 0;
    }

    const tibsim::SimulationConfig cfg = load_with_overrides(config_path, overrides);
    const std::string out_dir = resolve_out_dir(out_dir_flag);

    if (simulate->parsed()) {
      if (sim_reflection->parsed()) {
        const tibsim::ReflectionSweepResult result = tibsim::run_reflection_sweep(cfg);
        tibsim::write_reflection_outputs(result, out_dir);
        std::printf("wrote reflection_sweep.csv (%zu rows) and "
                    "reflection_sweep_critical.csv to %s\n",
                    result.rows.size(), out_dir.c_str());
      } else if (sim_ringdown->parsed()) {
        const tibsim::RingdownSweepResult result = tibsim::run_ringdown_sweep(cfg);
        tibsim::write_ringdown_outputs(result, out_dir);
        std::printf("wrote ringdown_sweep.csv (%zu rows) and %zu traces to %s\n",
                    result.rows.size(), result.traces.size(), out_dir.c_str());
      } else if (sim_kerr->parsed()) {
        const tibsim::KerrSweepResult result = tibsim::run_kerr_sweep(cfg);
        tibsim::write_kerr_outputs(result, out_dir);
        std::printf("wrote kerr_sweep.csv (%zu rows) to %s\n", result.rows.size(),
                    out_dir.c_str());
      }
      return 0;
    }

    if (report->parsed()) {
      const tibsim::PerformanceRun run = tibsim::run_performance_report(cfg);
      tibsim::write_performance_outputs(run, out_dir);
      const std::string text = tibsim::report_to_text(run.report);
      std::fwrite(text.data(), 1, text.size(), stdout);
      std::printf("wrote table1.txt and experiment CSVs to %s\n", out_dir.c_str());
      return 0;
    }
  } catch (const tibsim::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 1;
  } catch (const tibsim::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
