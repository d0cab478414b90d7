#include "qbag/cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "qbag/bench.hpp"
#include "qbag/error.hpp"

namespace qbag {

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) {
      items.push_back(text.substr(start));
      return items;
    }
    items.push_back(text.substr(start, comma - start));
    start = comma + 1;
  }
}

std::vector<std::size_t> parse_count_list(const std::string& text) {
  std::vector<std::size_t> out;
  for (const std::string& item : split_list(text)) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || v == 0) {
      throw Error(ErrorCode::InvalidArgument, "bad count '" + item + "' in '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  for (const std::string& item : split_list(text)) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size()) {
      throw Error(ErrorCode::InvalidArgument, "bad value '" + item + "' in '" + text + "'");
    }
    out.push_back(v);
  }
  return out;
}

struct CommonFlags {
  std::string dataset;
  std::string label_column = "auto";
  std::string task = "class";
  std::string b_list = "8";
  std::string delta_list = "0.2";
  std::size_t k = 10;
  double noise = 0.05;
  std::size_t repeats = 5;
  double test_fraction = 0.2;
  std::string distance = "fidelity-exact";
  std::uint32_t shots = 1024;
  double bootstrap_fraction = 0.5;
  std::uint64_t seed = 42;
  std::string out = "out";
};

void add_grid_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--dataset", f.dataset, "CSV file with one header row")->required();
  cmd->add_option("--label-column", f.label_column,
                  "label column name; auto = label (class) or target (regress)");
  cmd->add_option("--B", f.b_list, "comma list of ensemble sizes");
  cmd->add_option("--delta", f.delta_list, "comma list of seeding exponents");
  cmd->add_option("--k", f.k, "clusters per learner");
  cmd->add_option("--noise", f.noise, "training label corruption rate");
  cmd->add_option("--repeats", f.repeats, "repeats per grid cell");
  cmd->add_option("--test-fraction", f.test_fraction, "held-out fraction");
  cmd->add_option("--bootstrap-fraction", f.bootstrap_fraction,
                  "per-learner sample fraction");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out", f.out, "output directory");
}

void add_task_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--task", f.task, "class or regress")
      ->check(CLI::IsMember({"class", "regress"}));
  cmd->add_option("--distance", f.distance, "euclidean, fidelity-exact, or fidelity-shots")
      ->check(CLI::IsMember({"euclidean", "fidelity-exact", "fidelity-shots"}));
  cmd->add_option("--shots", f.shots, "measurement shots for fidelity-shots");
}

ExperimentConfig build_config(const CommonFlags& f) {
  ExperimentConfig config;
  config.dataset_path = f.dataset;
  config.label_column = f.label_column;
  config.task = f.task == "regress" ? Task::Regression : Task::Classification;
  config.b_values = parse_count_list(f.b_list);
  config.delta_values = parse_real_list(f.delta_list);
  config.k = f.k;
  config.noise_rate = f.noise;
  config.repeats = f.repeats;
  config.test_fraction = f.test_fraction;
  config.distance = mode_from_name(f.distance, f.shots);
  config.bootstrap_fraction = f.bootstrap_fraction;
  config.master_seed = f.seed;
  config.output_dir = f.out;
  return config;
}

int do_run(const CommonFlags& flags, const std::string& learner) {
  ExperimentConfig config = build_config(flags);
  config.learner = learner_from_name(learner);
  const std::vector<ResultRow> rows = run_experiment(config);
  std::filesystem::create_directories(config.output_dir);
  const std::string path = config.output_dir + "/results.csv";
  emit_csv(rows, path);
  std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
  return 0;
}

int do_sweep(const CommonFlags& flags, const std::string& learner_list) {
  ExperimentConfig config = build_config(flags);
  std::filesystem::create_directories(config.output_dir);
  std::vector<ResultRow> all_rows;
  std::vector<std::string> plots;
  for (const std::string& name : split_list(learner_list)) {
    config.learner = learner_from_name(name);
    const std::vector<ResultRow> rows = run_experiment(config);
    const std::string svg_path = config.output_dir + "/sweep_" + name + ".svg";
    emit_plot(rows, svg_path);
    plots.push_back(svg_path);
    all_rows.insert(all_rows.end(), rows.begin(), rows.end());
  }
  sort_rows(all_rows);
  const std::string csv_path = config.output_dir + "/sweep.csv";
  emit_csv(all_rows, csv_path);
  std::cout << "wrote " << csv_path << " (" << all_rows.size() << " rows)\n";
  for (const std::string& p : plots) std::cout << "wrote " << p << "\n";
  return 0;
}

int do_table2(const CommonFlags& flags) {
  ExperimentConfig config = build_config(flags);
  std::string column = config.label_column;
  if (column == "auto") column = "label";
  const Dataset data = load_csv(config.dataset_path, column, Task::Classification);
  const Table2Result result = run_table2(data, config);

  std::filesystem::create_directories(config.output_dir);
  const std::string cells_path = config.output_dir + "/table2_cells.csv";
  const std::string summary_path = config.output_dir + "/table2_summary.csv";
  for (const auto& [path, text] :
       {std::pair{cells_path, table2_cells_csv(result)},
        std::pair{summary_path, table2_summary_csv(result)}}) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path);
    out << text;
  }
  std::cout << table2_text(result);
  std::cout << "wrote " << cells_path << "\n";
  std::cout << "wrote " << summary_path << "\n";
  return 0;
}

int do_plot(const std::string& rows_path, const std::string& out_path,
            const std::string& learner_filter) {
  std::vector<ResultRow> rows = read_csv(rows_path);
  if (!learner_filter.empty()) {
    std::erase_if(rows, [&](const ResultRow& r) { return r.learner != learner_filter; });
    if (rows.empty()) {
      throw Error(ErrorCode::InvalidArgument,
                  "no rows with learner '" + learner_filter + "' in " + rows_path);
    }
  }
  emit_plot(rows, out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"bagged quantum k-means benchmark"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  std::string run_learner = "qmeans_bagging";
  CLI::App* run = app.add_subcommand("run", "one learner over a (delta, B) grid");
  add_grid_flags(run, run_flags);
  add_task_flags(run, run_flags);
  run->add_option("--learner", run_learner,
                  "qmeans_bagging, kmeans_bagging, dt_bagging, single_qmeans, or "
                  "single_kmeans");

  CommonFlags sweep_flags;
  sweep_flags.b_list = "4,8,12,16,20,24,28,32";
  sweep_flags.delta_list = "0.1,0.2,0.3,0.4";
  std::string sweep_learners = "qmeans_bagging,kmeans_bagging,dt_bagging";
  CLI::App* sweep =
      app.add_subcommand("sweep", "several learners over the grid, with plots");
  add_grid_flags(sweep, sweep_flags);
  add_task_flags(sweep, sweep_flags);
  sweep->add_option("--learner", sweep_learners, "comma list of learners");

  CommonFlags table2_flags;
  table2_flags.b_list = "4,8,12,16,20,24,28,32";
  table2_flags.delta_list = "0.1,0.2,0.3,0.4";
  CLI::App* table2 = app.add_subcommand(
      "table2", "dt_bagging vs kmeans_bagging vs qmeans_bagging under label noise");
  add_grid_flags(table2, table2_flags);

  std::string plot_rows;
  std::string plot_out = "plot.svg";
  std::string plot_learner;
  CLI::App* plot = app.add_subcommand("plot", "render a results CSV as an SVG");
  plot->add_option("--rows", plot_rows, "results CSV to read")->required();
  plot->add_option("--out", plot_out, "output SVG path");
  plot->add_option("--learner", plot_learner, "keep only this learner's rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (run->parsed()) return do_run(run_flags, run_learner);
    if (sweep->parsed()) return do_sweep(sweep_flags, sweep_learners);
    if (table2->parsed()) return do_table2(table2_flags);
    if (plot->parsed()) return do_plot(plot_rows, plot_out, plot_learner);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cerr << app.help();
  return 2;
}

int cli_main(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("qbag_bench");
  for (const std::string& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace qbag
