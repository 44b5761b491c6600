// Command-line front end: surrogate data generation, similarity reports,
// the three benchmark tasks, Pareto filtering, memorization probes, and
// transcript replay. Exit codes: 0 success, 2 configuration error,
// 3 partial failure (some runs failed or a generation target was missed).

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <fstream>
#include <iostream>
#include <sstream>

#include "surropub/agent.hpp"
#include "surropub/bayes_net.hpp"
#include "surropub/bench/tasks.hpp"
#include "surropub/csv_gen.hpp"
#include "surropub/dp/synthesizer.hpp"
#include "surropub/llm/memorization.hpp"
#include "surropub/llm/transports.hpp"
#include "surropub/metrics.hpp"
#include "surropub/scm.hpp"

namespace fs = std::filesystem;
using namespace surropub;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct TransportOptions {
  std::string profiles_path = "configs/providers.json";
  std::string profile;
  std::string transcript_in;   // replay from this transcript
  std::string transcript_out;  // save traffic here
  std::string scripted_file;   // canned completions, '---' separated
  double requests_per_minute = 30.0;
};

void add_transport_options(CLI::App* cmd, TransportOptions& options) {
  cmd->add_option("--profiles", options.profiles_path, "provider profiles JSON");
  cmd->add_option("--profile", options.profile, "provider profile name");
  cmd->add_option("--replay-transcript", options.transcript_in,
                  "serve responses from this transcript instead of the network");
  cmd->add_option("--save-transcript", options.transcript_out,
                  "append all traffic to this transcript file");
  cmd->add_option("--scripted", options.scripted_file,
                  "offline mode: serve canned completions from this file ('---' lines "
                  "separate completions)");
  cmd->add_option("--rpm", options.requests_per_minute, "rate limit, requests per minute");
}

llm::ChatClient make_llm_client(const TransportOptions& options) {
  std::shared_ptr<llm::Transport> transport;
  if (!options.scripted_file.empty()) {
    auto scripted = std::make_shared<llm::ScriptedTransport>();
    std::istringstream in(read_file(options.scripted_file));
    std::string line, block;
    const auto flush = [&] {
      if (!block.empty()) scripted->push_response(block);
      block.clear();
    };
    while (std::getline(in, line)) {
      if (line == "---") {
        flush();
      } else {
        block += line;
        block += '\n';
      }
    }
    flush();
    transport = std::move(scripted);
  } else if (!options.transcript_in.empty()) {
    transport = std::make_shared<llm::ReplayTransport>(
        llm::Transcript::load(options.transcript_in));
  } else {
    if (options.profile.empty())
      throw ConfigError("live mode needs --profile (or use --replay-transcript/--scripted)");
    const auto profiles = llm::load_profiles(options.profiles_path);
    transport =
        std::make_shared<llm::HttpTransport>(llm::find_profile(profiles, options.profile));
    llm::RateLimit limit;
    limit.requests_per_minute = options.requests_per_minute;
    return llm::ChatClient(std::move(transport), llm::RetryPolicy{}, limit);
  }
  // Offline transports need no rate limiting.
  return llm::ChatClient(std::move(transport), llm::RetryPolicy{});
}

void maybe_save_transcript(const llm::ChatClient& client, const TransportOptions& options) {
  if (!options.transcript_out.empty()) client.transcript()->save(options.transcript_out);
}

// generate --------------------------------------------------------------

struct GenerateArgs {
  std::string method;
  std::string schema_path;
  std::string private_path;  // univariate
  std::string out_dir = "out";
  std::size_t m = 1000;
  std::uint64_t seed = 0;
  std::size_t d_max = 5;
  double alpha = 1.0;
  std::size_t rows_per_batch = 50;
  std::size_t max_batches = 100;
  double temperature = 1.0;
  int max_retries = 3;
  std::size_t panel = 8;
  std::string mix_mode = "uniform";
  std::size_t k = 0;  // 0 = ceil(panel/2)
  std::vector<std::string> inputs;
  TransportOptions transport;
};

int run_generate(const GenerateArgs& args) {
  const fs::path out_dir(args.out_dir);
  fs::create_directories(out_dir);
  GenSpec spec{args.m, args.seed};

  if (args.method == "uniform" || args.method == "arbitrary" || args.method == "univariate") {
    auto schema = load_schema_file(args.schema_path);
    Dataset data(schema);
    if (args.method == "uniform") {
      data = gen_uniform(schema, spec);
    } else if (args.method == "univariate") {
      if (args.private_path.empty())
        throw ConfigError("generate univariate needs --private");
      const auto priv =
          Dataset::read_csv_file(schema, args.private_path, DatasetRole::Private);
      data = gen_univariate(priv, spec);
    } else {
      const auto net = build_random_bn(schema, args.d_max, args.alpha, args.seed);
      write_file(out_dir / "bayes_net.json", net.serialize());
      data = sample_bn(net, spec);
    }
    data.write_csv_file((out_dir / "data.csv").string());
    std::cout << "wrote " << data.size() << " records to " << (out_dir / "data.csv").string()
              << "\n";
    return kExitOk;
  }

  if (args.method == "csv") {
    auto schema = load_schema_file(args.schema_path);
    auto client = make_llm_client(args.transport);
    CsvGenConfig config;
    config.rows_per_batch = args.rows_per_batch;
    config.max_batches = args.max_batches;
    config.target_m = args.m;
    config.temperature = args.temperature;
    const auto result = generate_csv_dataset(client, schema, config, args.seed);
    maybe_save_transcript(client, args.transport);
    result.data.write_csv_file((out_dir / "data.csv").string());
    write_file(out_dir / "yield.jsonl", result.to_jsonl());
    std::cout << "wrote " << result.data.size() << " records ("
              << (result.target_reached ? "target reached" : "short of target") << ")\n";
    return result.target_reached ? kExitOk : kExitPartial;
  }

  if (args.method == "agent") {
    auto schema = load_schema_file(args.schema_path);
    auto client = make_llm_client(args.transport);
    std::vector<Dataset> panel_data;
    std::size_t aborted = 0;
    for (std::size_t run = 0; run < args.panel; ++run) {
      AgentOptions options;
      options.max_retries = args.max_retries;
      const auto result = run_agent(client, schema, options, args.seed + run);
      result.log.save((out_dir / ("agent_log_" + std::to_string(run) + ".jsonl")).string());
      if (!result.model) {
        ++aborted;
        std::cerr << "agent run " << run << " aborted: " << result.log.abort_reason << "\n";
        continue;
      }
      write_file(out_dir / ("model_" + std::to_string(run) + ".scm"),
                 result.model->to_dsl());
      const auto sample = sample_scm(*result.model, {args.m, args.seed + run}, 32);
      panel_data.push_back(sample.data);
    }
    maybe_save_transcript(client, args.transport);
    if (panel_data.empty()) {
      std::cerr << "every agent run aborted\n";
      return kExitPartial;
    }
    MixSpec mix_spec;
    mix_spec.mode = args.mix_mode == "max_coverage" ? MixSpec::Mode::MaxCoverage
                                                    : MixSpec::Mode::Uniform;
    mix_spec.k = args.k ? args.k : (panel_data.size() + 1) / 2;
    mix_spec.k = std::min(mix_spec.k, panel_data.size());
    mix_spec.target_m = args.m;
    mix_spec.seed = args.seed;
    const auto mixed = mix(panel_data, mix_spec);
    mixed.write_csv_file((out_dir / "data.csv").string());
    std::cout << "wrote " << mixed.size() << " records mixed from " << panel_data.size()
              << " agent run(s)\n";
    return aborted == 0 ? kExitOk : kExitPartial;
  }

  if (args.method == "mix") {
    if (args.inputs.empty()) throw ConfigError("generate mix needs --inputs");
    auto schema = load_schema_file(args.schema_path);
    std::vector<Dataset> datasets;
    for (const auto& path : args.inputs)
      datasets.push_back(Dataset::read_csv_file(schema, path));
    MixSpec mix_spec;
    mix_spec.mode = args.mix_mode == "max_coverage" ? MixSpec::Mode::MaxCoverage
                                                    : MixSpec::Mode::Uniform;
    mix_spec.k = args.k ? args.k : (datasets.size() + 1) / 2;
    mix_spec.target_m = args.m;
    mix_spec.seed = args.seed;
    if (mix_spec.mode == MixSpec::Mode::MaxCoverage) {
      const auto result = mix_max_coverage(datasets, mix_spec.k, args.m, args.seed);
      result.data.write_csv_file((out_dir / "data.csv").string());
      json selection = {{"selected", result.selected}, {"objective", result.objective}};
      write_file(out_dir / "selection.json", selection.dump(2));
    } else {
      mix_uniform(datasets, args.m, args.seed)
          .write_csv_file((out_dir / "data.csv").string());
    }
    std::cout << "wrote mixed dataset to " << (out_dir / "data.csv").string() << "\n";
    return kExitOk;
  }

  throw ConfigError("unknown generate method '" + args.method + "'");
}

// similarity ------------------------------------------------------------

int run_similarity(const std::string& schema_path, const std::string& reference_path,
                   const std::vector<std::string>& candidate_args,
                   const std::string& out_path) {
  auto schema = load_schema_file(schema_path);
  const auto reference =
      Dataset::read_csv_file(schema, reference_path, DatasetRole::Private);
  std::vector<Dataset> loaded;
  std::vector<std::pair<std::string, const Dataset*>> candidates;
  loaded.reserve(candidate_args.size());
  for (const auto& arg : candidate_args) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos)
      throw ConfigError("candidate must be name=path, got '" + arg + "'");
    loaded.push_back(Dataset::read_csv_file(schema, arg.substr(eq + 1)));
  }
  for (std::size_t i = 0; i < candidate_args.size(); ++i)
    candidates.emplace_back(candidate_args[i].substr(0, candidate_args[i].find('=')),
                            &loaded[i]);
  const auto rows = metrics::similarity_report(reference, candidates);
  const auto table = metrics::render_similarity_table(rows);
  if (out_path.empty()) {
    std::cout << table;
  } else {
    write_file(out_path, table);
    std::cout << "wrote " << out_path << "\n";
  }
  return kExitOk;
}

// tasks -----------------------------------------------------------------

struct TaskConfig {
  SchemaPtr schema;
  std::optional<Dataset> private_data;
  std::vector<std::pair<std::string, Dataset>> candidates;
  std::string target;
  std::vector<double> epsilons = {1, 2, 4, 8, 16};
  int n_seeds = 10;
  std::uint64_t base_seed = 0;
  std::vector<std::string> mechanisms = {"privbayes"};
  std::size_t workers = 1;
  std::string grid = "paper";
  bool select_per_seed = false;
  std::vector<std::string> relative_metrics;
  fs::path output_dir;
};

TaskConfig load_task_config(const std::string& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ConfigError("run config is not valid JSON: " + std::string(e.what()));
  }
  TaskConfig config;
  config.schema = load_schema_file(doc.at("schema").get<std::string>());
  config.private_data = Dataset::read_csv_file(
      config.schema, doc.at("private").get<std::string>(), DatasetRole::Private);
  for (const auto& c : doc.value("candidates", json::array())) {
    config.candidates.emplace_back(
        c.at("name").get<std::string>(),
        Dataset::read_csv_file(config.schema, c.at("path").get<std::string>(),
                               DatasetRole::Surrogate));
  }
  config.target = doc.value("target", "");
  if (doc.contains("epsilons")) config.epsilons = doc.at("epsilons").get<std::vector<double>>();
  config.n_seeds = doc.value("n_seeds", 10);
  config.base_seed = doc.value("base_seed", std::uint64_t{0});
  if (doc.contains("mechanisms")) {
    config.mechanisms = doc.at("mechanisms").get<std::vector<std::string>>();
  } else {
    config.mechanisms = {doc.value("mechanism", "privbayes")};
  }
  config.workers = doc.value("workers", std::size_t{1});
  config.grid = doc.value("grid", "paper");
  config.select_per_seed = doc.value("select_per_seed", false);
  if (doc.contains("relative_metrics"))
    config.relative_metrics = doc.at("relative_metrics").get<std::vector<std::string>>();
  config.output_dir = doc.value("output_dir", std::string("runs"));
  return config;
}

/// Streams records to <output_dir>/<name> as runs finish and feeds previously
/// completed records back so interrupted runs resume instead of recomputing.
struct ResumableRecords {
  ResumableRecords(const fs::path& dir, const std::string& name) : path(dir / name) {
    fs::create_directories(dir);
    if (fs::exists(path)) completed = bench::records_from_jsonl(read_file(path));
    out.open(path, std::ios::app);
    if (!out) throw ConfigError("cannot open " + path.string() + " for appending");
    sink.completed = &completed;
    sink.append = [this](const bench::BenchmarkRecord& record) {
      out << record.to_json() << '\n';
      out.flush();
    };
  }
  fs::path path;
  std::vector<bench::BenchmarkRecord> completed;
  std::ofstream out;
  bench::RecordSink sink;
};

int run_task1_cmd(const std::string& config_path) {
  const auto config = load_task_config(config_path);
  if (config.target.empty()) throw ConfigError("task1 requires \"target\" in the config");
  bench::Task1Options options;
  options.epsilons = config.epsilons;
  options.n_seeds = config.n_seeds;
  options.base_seed = config.base_seed;
  options.target = config.target;
  options.workers = config.workers;
  options.grid = config.grid == "smoke" ? bench::ClassifierGrid::smoke()
                                        : bench::ClassifierGrid::paper_default();
  ResumableRecords records(config.output_dir, "task1_records.jsonl");
  const auto result =
      bench::run_task1(*config.private_data, config.candidates, options, &records.sink);

  fs::create_directories(config.output_dir);
  std::ostringstream summary;
  summary << "candidate\tepsilon\tmean_adv_grid\tmean_adv_best\tmean_auc_best\tbest_pretrain"
             "\tfailed\n";
  for (const auto& candidate : result.candidates)
    for (const auto& cell : candidate.by_epsilon)
      summary << candidate.name << '\t' << cell.epsilon << '\t' << cell.mean_advantage_grid
              << '\t' << cell.mean_advantage_best << '\t' << cell.mean_auc_best << '\t'
              << cell.best_pretrain_config << '\t' << cell.failed_runs << '\n';
  write_file(config.output_dir / "task1_summary.tsv", summary.str());
  std::cout << summary.str();
  return result.failed_runs == 0 ? kExitOk : kExitPartial;
}

int run_task2_cmd(const std::string& config_path) {
  const auto config = load_task_config(config_path);
  ResumableRecords records(config.output_dir, "task2_records.jsonl");
  std::vector<bench::DegradationRow> rows;
  for (const auto& mechanism : config.mechanisms) {
    bench::Task2Options options;
    options.sweep.mechanism = mechanism;
    options.sweep.epsilons = config.epsilons;
    options.sweep.n_seeds = config.n_seeds;
    options.sweep.base_seed = config.base_seed;
    options.sweep.target = config.target;
    options.sweep.workers = config.workers;
    options.relative_metrics = config.relative_metrics;
    const auto mechanism_rows =
        bench::run_task2(*config.private_data, config.candidates, options, &records.sink);
    rows.insert(rows.end(), mechanism_rows.begin(), mechanism_rows.end());
  }

  fs::create_directories(config.output_dir);
  std::ostringstream jsonl, table;
  table << "candidate\tmechanism\tmetric\tepsilon\topt_config\tchosen_config\tdegradation"
           "\tstd_error\n";
  for (const auto& row : rows) {
    json line = {{"candidate", row.candidate},       {"mechanism", row.mechanism},
                 {"metric", row.metric},             {"epsilon", row.epsilon},
                 {"opt_config", row.opt_config},     {"chosen_config", row.chosen_config},
                 {"opt_value", row.opt_value},       {"chosen_value", row.chosen_value},
                 {"degradation", row.degradation},   {"relative", row.relative},
                 {"std_error", row.std_error}};
    jsonl << line.dump() << '\n';
    table << row.candidate << '\t' << row.mechanism << '\t' << row.metric << '\t'
          << row.epsilon << '\t' << row.opt_config << '\t' << row.chosen_config << '\t'
          << row.degradation << '\t' << row.std_error << '\n';
  }
  write_file(config.output_dir / "task2_degradation.jsonl", jsonl.str());
  write_file(config.output_dir / "task2_degradation.tsv", table.str());
  std::cout << "wrote " << rows.size() << " degradation rows to "
            << (config.output_dir / "task2_degradation.tsv").string() << "\n";
  return kExitOk;
}

int run_task3_cmd(const std::string& config_path) {
  const auto config = load_task_config(config_path);
  ResumableRecords records(config.output_dir, "task3_records.jsonl");
  fs::create_directories(config.output_dir);
  std::ostringstream jsonl, table;
  table << "candidate\tmechanism\tgroup\tl1\tl2\n";
  for (const auto& mechanism : config.mechanisms) {
    bench::SynthSweepOptions options;
    options.mechanism = mechanism;
    options.epsilons = config.epsilons;
    options.n_seeds = config.n_seeds;
    options.base_seed = config.base_seed;
    options.target = config.target;
    options.workers = config.workers;
    options.select_per_seed = config.select_per_seed;
    const auto results =
        bench::run_task3(*config.private_data, config.candidates, options, &records.sink);
    for (const auto& candidate : results) {
      for (const auto& curve : candidate.groups) {
        json line = {{"candidate", curve.candidate},
                     {"mechanism", mechanism},
                     {"group", curve.metric_group},
                     {"epsilons", curve.epsilons},
                     {"candidate_values", curve.candidate_values},
                     {"private_values", curve.private_values},
                     {"l1", curve.l1},
                     {"l2", curve.l2}};
        jsonl << line.dump() << '\n';
        table << curve.candidate << '\t' << mechanism << '\t' << curve.metric_group << '\t'
              << curve.l1 << '\t' << curve.l2 << '\n';
      }
      table << candidate.name << '\t' << mechanism << "\tmean\t" << candidate.mean_l1
            << '\t' << candidate.mean_l2 << '\n';
    }
  }
  write_file(config.output_dir / "task3_curves.jsonl", jsonl.str());
  write_file(config.output_dir / "task3_summary.tsv", table.str());
  std::cout << table.str();
  return kExitOk;
}

// pareto ----------------------------------------------------------------

/// Degradation files pivot to one row per candidate: each requested objective
/// (a metric or "group:<name>") averages that metric's degradation across
/// epsilons, mirroring the per-synthesizer Pareto tables.
int run_pareto_degradation(const std::string& text, const std::vector<std::string>& objectives,
                           bool maximize, const std::string& out_path) {
  std::map<std::string, std::map<std::string, std::pair<double, std::size_t>>> sums;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    auto& cell = sums[j.at("candidate").get<std::string>()][j.at("metric").get<std::string>()];
    cell.first += j.at("degradation").get<double>();
    cell.second += 1;
  }
  std::vector<std::string> names;
  std::vector<std::vector<double>> rows;
  for (const auto& [candidate, metrics_map] : sums) {
    std::vector<double> row;
    bool complete = true;
    for (const auto& objective : objectives) {
      const auto it = metrics_map.find(objective);
      if (it == metrics_map.end()) {
        complete = false;
        break;
      }
      row.push_back(it->second.first / double(it->second.second));
    }
    if (complete) {
      names.push_back(candidate);
      rows.push_back(std::move(row));
    }
  }
  if (rows.empty()) throw ConfigError("no candidate carries all requested objectives");
  const auto frontier = bench::pareto_frontier(rows, /*minimize=*/!maximize);
  std::ostringstream out;
  out << "candidate";
  for (const auto& objective : objectives) out << '\t' << objective;
  out << '\n';
  for (std::size_t f : frontier) {
    out << names[f];
    for (double v : rows[f]) out << '\t' << v;
    out << '\n';
  }
  if (out_path.empty()) {
    std::cout << out.str();
  } else {
    write_file(out_path, out.str());
    std::cout << "frontier: " << frontier.size() << " of " << rows.size()
              << " candidates -> " << out_path << "\n";
  }
  return kExitOk;
}

int run_pareto(const std::string& input_path, const std::vector<std::string>& objectives,
               bool maximize, const std::string& out_path) {
  if (objectives.size() < 2) throw ConfigError("pareto needs at least two --objectives");
  const std::string text = read_file(input_path);
  // Degradation rows carry a "degradation" field; benchmark records "metrics".
  {
    std::istringstream probe(text);
    std::string first;
    while (std::getline(probe, first) && first.empty()) {
    }
    if (!first.empty() && json::parse(first).contains("degradation"))
      return run_pareto_degradation(text, objectives, maximize, out_path);
  }
  const auto records = bench::records_from_jsonl(text);
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < records.size(); ++i) {
    std::vector<double> row;
    bool complete = true;
    for (const auto& objective : objectives) {
      const auto it = records[i].metrics.find(objective);
      if (it == records[i].metrics.end()) {
        complete = false;
        break;
      }
      row.push_back(it->second);
    }
    if (complete) {
      rows.push_back(std::move(row));
      kept.push_back(i);
    }
  }
  if (rows.empty()) throw ConfigError("no input rows carry all requested objectives");
  const auto frontier = bench::pareto_frontier(rows, /*minimize=*/!maximize);
  std::ostringstream out;
  out << "method\tconfig\tepsilon";
  for (const auto& objective : objectives) out << '\t' << objective;
  out << '\n';
  for (std::size_t f : frontier) {
    const auto& record = records[kept[f]];
    out << record.method << '\t' << record.config_id << '\t' << record.epsilon;
    for (const auto& objective : objectives) out << '\t' << record.metrics.at(objective);
    out << '\n';
  }
  if (out_path.empty()) {
    std::cout << out.str();
  } else {
    write_file(out_path, out.str());
    std::cout << "frontier: " << frontier.size() << " of " << rows.size() << " rows -> "
              << out_path << "\n";
  }
  return kExitOk;
}

// memorize --------------------------------------------------------------

int run_memorize(const std::string& schema_path, const std::string& data_path,
                 const std::string& mode, std::size_t n_prompt_rows,
                 std::size_t n_completion_rows, std::size_t trials, std::uint64_t seed,
                 const TransportOptions& transport) {
  auto schema = load_schema_file(schema_path);
  const auto data = Dataset::read_csv_file(schema, data_path);
  auto client = make_llm_client(transport);
  llm::MemorizationReport report;
  if (mode == "header") {
    report = llm::header_test(client, data, n_prompt_rows, n_completion_rows);
  } else if (mode == "row") {
    report = llm::row_completion_test(client, data, trials, seed, n_prompt_rows);
  } else {
    throw ConfigError("memorize --mode must be header or row");
  }
  maybe_save_transcript(client, transport);
  json out = {{"mode", mode},
              {"rows_scored", report.rows_scored},
              {"exact_match_rate", report.exact_match_rate},
              {"cell_accuracy", report.cell_accuracy()},
              {"cells_correct", report.cells_correct},
              {"cells_incorrect", report.cells_incorrect},
              {"cells_missing", report.cells_missing},
              {"char_similarity", report.char_similarity},
              {"truncated_completion", report.truncated_completion}};
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"surrogate public data toolkit"};
  app.require_subcommand(1);

  // generate
  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "generate a surrogate dataset");
  generate->add_option("method", gen.method, "uniform|univariate|arbitrary|csv|agent|mix")
      ->required();
  generate->add_option("--schema", gen.schema_path, "schema document")->required();
  generate->add_option("--private", gen.private_path, "private CSV (univariate)");
  generate->add_option("--m", gen.m, "records to generate");
  generate->add_option("--seed", gen.seed, "random seed");
  generate->add_option("--out", gen.out_dir, "output directory");
  generate->add_option("--d-max", gen.d_max, "max in-degree (arbitrary)");
  generate->add_option("--alpha", gen.alpha, "Dirichlet concentration (arbitrary)");
  generate->add_option("--rows-per-batch", gen.rows_per_batch, "csv batch size");
  generate->add_option("--max-batches", gen.max_batches, "csv batch cap");
  generate->add_option("--temperature", gen.temperature, "sampling temperature (csv)");
  generate->add_option("--max-retries", gen.max_retries, "agent retries per state");
  generate->add_option("--panel", gen.panel, "agent panel size");
  generate->add_option("--mix", gen.mix_mode, "uniform|max_coverage (agent/mix)");
  generate->add_option("--k", gen.k, "selection budget for max_coverage");
  generate->add_option("--inputs", gen.inputs, "input CSVs (mix)")->delimiter(',');
  add_transport_options(generate, gen.transport);

  // similarity
  std::string sim_schema, sim_reference, sim_out;
  std::vector<std::string> sim_candidates;
  auto* similarity = app.add_subcommand("similarity", "1-TVD / 1-3WM similarity report");
  similarity->add_option("--schema", sim_schema)->required();
  similarity->add_option("--reference", sim_reference, "reference CSV")->required();
  similarity->add_option("--candidate", sim_candidates, "name=path, repeatable")->required();
  similarity->add_option("--out", sim_out, "output TSV (default stdout)");

  // tasks
  std::string task1_config, task2_config, task3_config;
  app.add_subcommand("task1", "classifier pretraining benchmark")
      ->add_option("--config", task1_config, "run config JSON")
      ->required();
  app.add_subcommand("task2", "synthesizer hyperparameter tuning benchmark")
      ->add_option("--config", task2_config, "run config JSON")
      ->required();
  app.add_subcommand("task3", "privacy-utility curve benchmark")
      ->add_option("--config", task3_config, "run config JSON")
      ->required();

  // pareto
  std::string pareto_input, pareto_out;
  std::vector<std::string> pareto_objectives;
  bool pareto_max = false;
  auto* pareto = app.add_subcommand("pareto", "non-dominated filter over record files");
  pareto->add_option("--input", pareto_input, "records JSONL")->required();
  pareto->add_option("--objectives", pareto_objectives, "metric names")
      ->delimiter(',')
      ->required();
  pareto->add_flag("--maximize", pareto_max, "treat objectives as maximized");
  pareto->add_option("--out", pareto_out, "output TSV (default stdout)");

  // memorize
  std::string mem_schema, mem_data, mem_mode = "header";
  std::size_t mem_prompt_rows = 5, mem_completion_rows = 10, mem_trials = 25;
  std::uint64_t mem_seed = 0;
  TransportOptions mem_transport;
  auto* memorize = app.add_subcommand("memorize", "header / row-completion probes");
  memorize->add_option("--schema", mem_schema)->required();
  memorize->add_option("--data", mem_data, "dataset CSV")->required();
  memorize->add_option("--mode", mem_mode, "header|row");
  memorize->add_option("--n-prompt-rows", mem_prompt_rows);
  memorize->add_option("--n-completion-rows", mem_completion_rows);
  memorize->add_option("--trials", mem_trials, "row-completion trials");
  memorize->add_option("--seed", mem_seed);
  add_transport_options(memorize, mem_transport);

  // replay: generation re-run served entirely from a transcript
  GenerateArgs replay_args;
  auto* replay = app.add_subcommand("replay", "re-run csv/agent generation from a transcript");
  replay->add_option("method", replay_args.method, "csv|agent")->required();
  replay->add_option("--schema", replay_args.schema_path)->required();
  replay->add_option("--transcript", replay_args.transport.transcript_in,
                     "recorded transcript")
      ->required();
  replay->add_option("--m", replay_args.m);
  replay->add_option("--seed", replay_args.seed);
  replay->add_option("--out", replay_args.out_dir);
  replay->add_option("--rows-per-batch", replay_args.rows_per_batch);
  replay->add_option("--max-batches", replay_args.max_batches);
  replay->add_option("--max-retries", replay_args.max_retries);
  replay->add_option("--panel", replay_args.panel);
  replay->add_option("--mix", replay_args.mix_mode);
  replay->add_option("--k", replay_args.k);

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return run_generate(gen);
    if (similarity->parsed())
      return run_similarity(sim_schema, sim_reference, sim_candidates, sim_out);
    if (app.get_subcommand("task1")->parsed()) return run_task1_cmd(task1_config);
    if (app.get_subcommand("task2")->parsed()) return run_task2_cmd(task2_config);
    if (app.get_subcommand("task3")->parsed()) return run_task3_cmd(task3_config);
    if (pareto->parsed())
      return run_pareto(pareto_input, pareto_objectives, pareto_max, pareto_out);
    if (memorize->parsed())
      return run_memorize(mem_schema, mem_data, mem_mode, mem_prompt_rows,
                          mem_completion_rows, mem_trials, mem_seed, mem_transport);
    if (replay->parsed()) {
      if (replay_args.method != "csv" && replay_args.method != "agent")
        throw ConfigError("replay method must be csv or agent");
      return run_generate(replay_args);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitConfig;
}
