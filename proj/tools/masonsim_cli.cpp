#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

#include "mason/verify.hpp"

namespace {

std::string output_path(const std::string& flag_value,
                        const std::string& fallback_name) {
  if (!flag_value.empty()) return flag_value;
  const char* dir = std::getenv("MASONSIM_OUT_DIR");
  if (dir && *dir) return std::string(dir) + "/" + fallback_name;
  return fallback_name;
}

std::vector<std::size_t> range_axis(std::size_t lo, std::size_t hi,
                                    std::size_t step) {
  std::vector<std::size_t> out;
  for (std::size_t v = lo; v <= hi; v += step) out.push_back(v);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sybil classification simulator"};
  app.require_subcommand(1);

  std::string scenario_path, out_path, trace_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t trials = 0;
  std::size_t threads = std::thread::hardware_concurrency();
  if (threads == 0) threads = 1;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--scenario", scenario_path, "scenario file")->required();
    sub->add_option("--output", out_path, "output CSV path");
    sub->add_option("--seed", seed, "master seed override")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--trials", trials, "trial count override");
    sub->add_option("--threads", threads, "worker threads");
  };

  CLI::App* run = app.add_subcommand("run", "execute trials, write CSV");
  add_common(run);
  run->add_option("--trace", trace_path, "write a message trace here");

  CLI::App* sweep =
      app.add_subcommand("sweep", "grid over conforming/liar counts");
  add_common(sweep);
  std::size_t c_lo = 5, c_hi = 30, c_step = 5;
  std::size_t l_lo = 0, l_hi = 10, l_step = 2;
  sweep->add_option("--c-min", c_lo);
  sweep->add_option("--c-max", c_hi);
  sweep->add_option("--c-step", c_step)->check(CLI::PositiveNumber);
  sweep->add_option("--lns-min", l_lo);
  sweep->add_option("--lns-max", l_hi);
  sweep->add_option("--lns-step", l_step)->check(CLI::PositiveNumber);

  CLI::App* roc = app.add_subcommand("roc", "distance-threshold sweep");
  add_common(roc);
  double t_lo = 0.0, t_hi = 12.0, t_step = 0.25;
  roc->add_option("--t-min", t_lo);
  roc->add_option("--t-max", t_hi);
  roc->add_option("--t-step", t_step)->check(CLI::PositiveNumber);

  CLI::App* verify = app.add_subcommand("verify", "brute-force oracle suite");
  std::size_t max_identities = 10, cases = 200;
  std::uint64_t verify_seed = 1;
  verify->add_option("--max-identities", max_identities);
  verify->add_option("--cases", cases);
  verify->add_option("--seed", verify_seed);

  CLI::App* replay = app.add_subcommand("replay", "validate a trace file");
  std::string replay_path;
  replay->add_option("trace", replay_path, "trace file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (verify->parsed()) {
      const mason::VerifyReport rep =
          mason::verify_all(cases, max_identities, verify_seed);
      std::cout << "verify: " << rep.cases << " cases, " << rep.failures
                << " failures\n";
      for (const auto& n : rep.notes) std::cout << "  " << n << '\n';
      return rep.ok() ? 0 : 1;
    }

    if (replay->parsed()) {
      std::ifstream in(replay_path);
      if (!in) {
        std::cerr << "cannot open trace: " << replay_path << '\n';
        return 2;
      }
      const auto err = mason::validate_trace(in);
      if (err) {
        std::cout << "invalid trace: " << *err << '\n';
        return 1;
      }
      std::cout << "trace ok\n";
      return 0;
    }

    mason::ScenarioConfig cfg = mason::parse_scenario_file(scenario_path);
    if (seed_set) cfg.master_seed = seed;
    if (trials > 0) cfg.trials = trials;
    cfg.validate();

    if (run->parsed()) {
      std::ofstream csv(output_path(out_path, "trials.csv"));
      if (!csv) {
        std::cerr << "cannot open output\n";
        return 2;
      }
      std::ofstream trace;
      if (!trace_path.empty()) {
        trace.open(trace_path);
        // single-trial trace of the first trial keeps replay deterministic
        mason::run_trial(cfg, 0, &trace);
      }
      mason::run_trials(cfg, threads, &csv);
      return 0;
    }
    if (sweep->parsed()) {
      std::ofstream csv(output_path(out_path, "sweep.csv"));
      if (!csv) {
        std::cerr << "cannot open output\n";
        return 2;
      }
      mason::sweep_grid(cfg, range_axis(c_lo, c_hi, c_step),
                        range_axis(l_lo, l_hi, l_step), threads, csv);
      return 0;
    }
    if (roc->parsed()) {
      std::ofstream csv(output_path(out_path, "roc.csv"));
      if (!csv) {
        std::cerr << "cannot open output\n";
        return 2;
      }
      std::vector<double> ts;
      for (double t = t_lo; t <= t_hi + 1e-9; t += t_step) ts.push_back(t);
      csv << "threshold,tpr,fpr\n";
      for (const auto& p : mason::roc_curve(cfg, ts)) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%.4f,%.6f,%.6f", p.threshold, p.tpr,
                      p.fpr);
        csv << buf << '\n';
      }
      return 0;
    }
  } catch (const mason::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
