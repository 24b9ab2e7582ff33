#include "opkde/experiment.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kData = 3, kNumerical = 4, kVerifyFailed = 5 };

// Flags that override one config key each. Applied in the order below, after
// the config file, then any --set pairs.
struct Overrides {
  std::vector<std::pair<std::string, std::optional<std::string>>> flags{
      {"seed", {}},   {"family", {}},   {"lambda", {}}, {"epsilon", {}},
      {"sigma_k", {}}, {"sigma_l", {}}, {"folds", {}},  {"backend", {}},
      {"chol_tol", {}}, {"threads", {}}};
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    for (auto& [key, value] : flags) {
      std::string flag = "--" + key;
      for (char& c : flag) {
        if (c == '_') c = '-';
      }
      app->add_option(flag, value, "Override config key '" + key + "'");
    }
    app->add_option("--set", sets, "Override any config key, as key=value (repeatable)");
  }

  void apply(opkde::ExperimentConfig& config) const {
    for (const auto& [key, value] : flags) {
      if (value) opkde::apply_setting(config, key, *value);
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw opkde::ConfigError("--set expects key=value, got '" + s + "'");
      opkde::apply_setting(config, s.substr(0, eq), s.substr(eq + 1));
    }
  }
};

std::vector<opkde::ExperimentConfig> read_configs(const std::vector<std::string>& paths) {
  std::vector<opkde::ExperimentConfig> out;
  if (paths.empty()) out.emplace_back();
  for (const auto& p : paths) {
    for (auto& c : opkde::load_configs(p)) out.push_back(std::move(c));
  }
  return out;
}

void finish(const opkde::MetricsReport& report, const std::string& out) {
  std::cout << report.to_table();
  if (!out.empty()) std::cout << "report written to " << out << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Operator-valued kernel dependency estimation"};
  app.require_subcommand(1);

  std::vector<std::string> config_paths;
  std::string data_path, test_path, out_path, predictions_path;
  Overrides overrides;

  auto* fit = app.add_subcommand("fit-predict", "Train on one file and decode another");
  fit->add_option("--config", config_paths, "Config or report file")->expected(0, 1);
  fit->add_option("--data", data_path, "Training data file");
  fit->add_option("--test", test_path, "Test data file");
  fit->add_option("--out", out_path, "Report file");
  fit->add_option("--predictions", predictions_path,
                  "Predictions file (default: <out>.predictions)");
  overrides.attach(fit);

  auto* cv = app.add_subcommand("cv", "Seeded k-fold cross-validation");
  cv->add_option("--config", config_paths, "Config or report file")->expected(0, 1);
  cv->add_option("--data", data_path, "Data file");
  cv->add_option("--out", out_path, "Report file");
  overrides.attach(cv);

  std::vector<std::string> families;
  auto* compare = app.add_subcommand("compare", "Paired cross-validation of several variants");
  compare->add_option("--config", config_paths, "Config or report files (repeatable)");
  compare->add_option("--families", families, "Expand the config into these families")
      ->delimiter(',');
  compare->add_option("--data", data_path, "Data file");
  compare->add_option("--out", out_path, "Report file");
  overrides.attach(compare);

  opkde::VerifyOptions verify_opts;
  auto* verify = app.add_subcommand("verify", "Check the Gram path against brute-force references");
  verify->add_option("--max-n", verify_opts.max_n, "Largest training set in oracle checks");
  verify->add_option("--max-d", verify_opts.max_d, "Largest explicit output dimension");
  verify->add_option("--trials", verify_opts.trials, "Random instances per check");
  verify->add_option("--seed", verify_opts.seed, "Random seed");
  verify->add_option("--out", out_path, "Report file");

  opkde::BenchOptions bench_opts;
  auto* bench = app.add_subcommand("bench", "Time exact and low-rank covariance scoring");
  bench->add_option("--n", bench_opts.n_list, "Training sizes")->delimiter(',');
  bench->add_option("--chol-tol", bench_opts.chol_tol, "Incomplete Cholesky tolerance");
  bench->add_option("--seed", bench_opts.seed, "Random seed");
  bench->add_option("--lambda", bench_opts.lambda, "Ridge parameter");
  bench->add_option("--sigma-k", bench_opts.sigma_k, "Input RBF width");
  bench->add_option("--sigma-l", bench_opts.sigma_l, "Output RBF width");
  bench->add_option("--out", out_path, "Report file");

  std::string kind = "toy";
  opkde::Index gen_n = 600;
  std::uint64_t gen_seed = 0;
  double gen_noise = 0.1;
  auto* generate = app.add_subcommand("generate", "Write a synthetic data file");
  generate->add_option("--kind", kind, "toy | digits | ocr | clusters")
      ->check(CLI::IsMember({"toy", "digits", "ocr", "clusters"}));
  generate->add_option("--n", gen_n, "Number of samples (words for ocr)");
  generate->add_option("--seed", gen_seed, "Random seed");
  generate->add_option("--noise", gen_noise, "Noise level (pixel flip rate for ocr)");
  generate->add_option("--out", out_path, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*fit || *cv) {
      auto configs = read_configs(config_paths);
      opkde::ExperimentConfig config = configs.front();
      overrides.apply(config);
      if (*fit) {
        const auto report =
            opkde::cmd_fit_predict(config, data_path, test_path, out_path, predictions_path);
        finish(report, out_path);
      } else {
        finish(opkde::cmd_cv(config, data_path, out_path), out_path);
      }
    } else if (*compare) {
      auto configs = read_configs(config_paths);
      if (!families.empty()) {
        if (configs.size() != 1) throw opkde::ConfigError("--families needs exactly one config");
        std::vector<opkde::ExperimentConfig> expanded;
        for (const auto& f : families) {
          opkde::ExperimentConfig c = configs.front();
          opkde::apply_setting(c, "family", f);
          expanded.push_back(c);
        }
        configs = std::move(expanded);
      }
      for (auto& c : configs) overrides.apply(c);
      finish(opkde::cmd_compare(configs, data_path, out_path), out_path);
    } else if (*verify) {
      const auto report = opkde::cmd_verify(verify_opts);
      std::cout << report.to_table();
      if (!out_path.empty()) opkde::write_text_file(out_path, report.to_records());
      return report.passed() ? kOk : kVerifyFailed;
    } else if (*bench) {
      const auto report = opkde::cmd_bench(bench_opts);
      std::cout << report.to_table();
      if (!out_path.empty()) opkde::write_text_file(out_path, report.to_records());
    } else if (*generate) {
      if (kind == "toy" || kind == "clusters") {
        const opkde::Dataset d = kind == "toy" ? opkde::synthesize_toy(gen_n, gen_seed, gen_noise)
                                               : opkde::synthesize_clusters(gen_n, 8, gen_noise, gen_seed);
        std::string text = "# " + std::to_string(d.inputs.cols()) + " input columns, " +
                           std::to_string(d.outputs.cols()) + " output columns\n";
        char buf[64];
        for (opkde::Index i = 0; i < d.size(); ++i) {
          for (opkde::Index j = 0; j < d.inputs.cols() + d.outputs.cols(); ++j) {
            const double v = j < d.inputs.cols() ? d.inputs(i, j) : d.outputs(i, j - d.inputs.cols());
            std::snprintf(buf, sizeof(buf), "%s%.17g", j ? "," : "", v);
            text += buf;
          }
          text += "\n";
        }
        opkde::write_text_file(out_path, text);
      } else if (kind == "digits") {
        opkde::write_usps(out_path, opkde::synthesize_digits(gen_n, gen_seed));
      } else {
        opkde::write_ocr_words(out_path, opkde::synthesize_ocr_words(gen_n, 2, 8, opkde::kLowercaseAlphabet,
                                                                     gen_seed, gen_noise));
      }
      std::cout << "wrote " << out_path << "\n";
    }
  } catch (const opkde::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const opkde::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const opkde::DimensionError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const opkde::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
