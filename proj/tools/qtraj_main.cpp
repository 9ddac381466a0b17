// qtraj: simulate quantum measurement trajectories and estimate model
// parameters from the outcome record alone.
//
// Subcommands: simulate, discriminate, refine, analyze, identifiability,
// entropy-rate. Exit codes: 0 success, 2 validation error, 3 numerical
// error, 4 I/O error.

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "qtraj/channel_analysis.hpp"
#include "qtraj/discrimination.hpp"
#include "qtraj/errors.hpp"
#include "qtraj/io_util.hpp"
#include "qtraj/model_io.hpp"
#include "qtraj/model_registry.hpp"
#include "qtraj/record_io.hpp"
#include "qtraj/refine.hpp"
#include "qtraj/trajectory.hpp"

namespace {

using nlohmann::json;
using namespace qtraj;

struct ModelSource {
  std::string file;
  std::string registry;
  std::vector<double> params;

  void add_options(CLI::App* cmd, const std::string& prefix = "") {
    const std::string dash = prefix.empty() ? "" : "-" + prefix;
    auto* file_opt = cmd->add_option("--model" + dash, file, "model JSON file");
    auto* reg_opt = cmd->add_option("--registry" + dash, registry, "registry model name");
    cmd->add_option("--param" + dash, params, "registry parameter vector")->needs(reg_opt);
    file_opt->excludes(reg_opt);
  }

  KrausModel load() const {
    if (!file.empty()) return load_model(file);
    if (!registry.empty()) return registry_entry(registry).make(params);
    throw ValidationError("specify a model via --model or --registry/--param");
  }
};

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) {
      row.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

DensityMatrix initial_state(const std::string& init, const KrausModel& model) {
  if (init == "mixed") return DensityMatrix::mixed(model.dim());
  if (init == "invariant") {
    const ChannelDecomposition dec = decompose(model);
    return DensityMatrix::make(dec.maximal_invariant_state);
  }
  // Otherwise a density-matrix JSON file: { "dim": d, "rho": matrix }.
  const std::string text = read_file(init);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw IoError(std::string("initial state file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("rho") || !doc["rho"].is_array()) {
    throw IoError("initial state file needs a 'rho' matrix");
  }
  const auto& rows = doc["rho"];
  const Index d = static_cast<Index>(rows.size());
  Matrix m(d, d);
  for (Index r = 0; r < d; ++r) {
    if (!rows[r].is_array() || rows[r].size() != static_cast<std::size_t>(d)) {
      throw IoError("'rho' must be a square matrix of [re, im] pairs");
    }
    for (Index c = 0; c < d; ++c) {
      const auto& e = rows[r][c];
      if (!e.is_array() || e.size() != 2) throw IoError("'rho' entries must be [re, im] pairs");
      m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
    }
  }
  return DensityMatrix::make(m);
}

std::filesystem::path seed_suffixed(const std::filesystem::path& path, std::uint64_t seed) {
  std::filesystem::path out = path;
  const std::string ext = out.extension().string();
  out.replace_extension();
  out += ".s" + std::to_string(seed) + ext;
  return out;
}

std::string states_csv(const TrajectoryRecord& record) {
  const Index d = record.dim;
  std::ostringstream out;
  out << "step";
  for (Index r = 0; r < d; ++r) {
    for (Index c = 0; c < d; ++c) {
      out << ",rho_" << r << "_" << c << "_re,rho_" << r << "_" << c << "_im";
    }
  }
  out << "\n";
  auto emit = [&](std::uint64_t step, const Matrix& m) {
    out << step;
    for (Index r = 0; r < d; ++r) {
      for (Index c = 0; c < d; ++c) {
        out << "," << fmt_double(m(r, c).real()) << "," << fmt_double(m(r, c).imag());
      }
    }
    out << "\n";
  };
  if (record.initial_state) emit(0, *record.initial_state);
  for (std::size_t k = 0; k < record.states.size(); ++k) {
    emit(k + 1, record.states[k]);
  }
  return out.str();
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
  ModelSource model;
  std::string init = "mixed";
  std::uint64_t steps = 2000;
  std::uint64_t seed = 0;
  std::string out;
  std::string states_out;
  std::uint64_t repeat = 1;
  std::uint64_t jobs = 1;
};

void run_simulate(const SimulateArgs& args) {
  const KrausModel model = args.model.load();
  const DensityMatrix rho0 = initial_state(args.init, model);
  const bool record_states = !args.states_out.empty();

  auto one_run = [&](std::uint64_t seed, const std::filesystem::path& out_path,
                     const std::filesystem::path& states_path) {
    const TrajectoryRecord record = run_trajectory(model, rho0, args.steps, seed, record_states);
    save_record(record, resolve_output_path(out_path));
    if (record_states) {
      write_file_atomic(resolve_output_path(states_path), states_csv(record));
    }
  };

  if (args.repeat <= 1) {
    one_run(args.seed, args.out, args.states_out);
    return;
  }

  // Independent seeds seed..seed+repeat-1, each to its own suffixed file.
  std::atomic<std::uint64_t> next{0};
  std::vector<std::thread> workers;
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const std::uint64_t jobs = std::max<std::uint64_t>(1, args.jobs);
  for (std::uint64_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      while (true) {
        const std::uint64_t k = next.fetch_add(1);
        if (k >= args.repeat) return;
        try {
          const std::uint64_t seed = args.seed + k;
          one_run(seed, seed_suffixed(args.out, seed),
                  args.states_out.empty() ? std::filesystem::path{}
                                          : seed_suffixed(args.states_out, seed));
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// ---------------------------------------------------------------------------

struct DiscriminateArgs {
  std::string record_path;
  std::string registry = "paper-example-5.2";
  std::vector<std::string> candidates;
  std::vector<std::string> candidate_models;
  std::string prior = "uniform";
  double epsilon = 0.01;
  std::string init = "mixed";
  std::uint64_t max_steps = 0;
  std::string out;
  std::string report_out;
};

CandidateSet build_candidates(const DiscriminateArgs& args) {
  std::vector<Candidate> cands;
  if (!args.candidates.empty() && !args.candidate_models.empty()) {
    throw ValidationError("--candidates and --candidate-models are mutually exclusive");
  }
  if (!args.candidates.empty()) {
    const ModelRegistryEntry& entry = registry_entry(args.registry);
    for (const auto& token : args.candidates) {
      char* end = nullptr;
      const double value = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0') {
        throw ValidationError("candidate '" + token + "' is not a number");
      }
      cands.push_back({token, value, entry.make(std::span<const double>(&value, 1))});
    }
  } else if (!args.candidate_models.empty()) {
    for (const auto& path : args.candidate_models) {
      cands.push_back({std::filesystem::path(path).stem().string(),
                       std::numeric_limits<double>::quiet_NaN(), load_model(path)});
    }
  } else {
    throw ValidationError("specify candidates via --candidates or --candidate-models");
  }

  std::vector<double> prior;
  if (args.prior == "uniform") {
    prior = CandidateSet::uniform_prior(cands.size());
  } else {
    std::stringstream ss(args.prior);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
      prior.push_back(std::strtod(piece.c_str(), nullptr));
    }
  }
  return CandidateSet(std::move(cands), std::move(prior));
}

void run_discriminate(const DiscriminateArgs& args) {
  const TrajectoryRecord record = load_record(args.record_path);
  const CandidateSet set = build_candidates(args);
  const DensityMatrix rho0 = initial_state(args.init, set.candidate(0).model);
  const std::uint64_t max_steps = args.max_steps == 0 ? record.size() : args.max_steps;

  const SelectionResult result = run_discrimination(set, rho0, record, args.epsilon, max_steps);

  if (!args.out.empty()) {
    std::ostringstream csv;
    csv << "step,outcome";
    for (const auto& c : set.candidates()) csv << ",log10_pi_" << c.label;
    csv << "\n";
    const double ln10 = std::log(10.0);
    for (std::size_t k = 1; k < result.trace.log_scores.size(); ++k) {
      const auto& scores = result.trace.log_scores[k];
      double best = -std::numeric_limits<double>::infinity();
      for (const double s : scores) best = std::max(best, s);
      double total = 0.0;
      for (const double s : scores) total += std::exp(s - best);
      const double log_norm = best + std::log(total);
      csv << k << "," << record.outcomes[k - 1];
      for (const double s : scores) {
        const double log10_pi = (s - log_norm) / ln10;
        csv << "," << (std::isinf(log10_pi) ? "-inf" : fmt_double(log10_pi));
      }
      csv << "\n";
    }
    write_file_atomic(resolve_output_path(args.out), csv.str());
  }

  json report;
  report["selected"] = nullptr;
  report["crossing_step"] = nullptr;
  if (result.selected) {
    report["selected"] = set.candidate(*result.selected).label;
    report["crossing_step"] = result.crossing_step;
  }
  report["steps_consumed"] = result.steps_consumed;
  json posteriors = json::object();
  for (std::size_t i = 0; i < set.size(); ++i) {
    posteriors[set.candidate(i).label] = result.final_posteriors[i];
  }
  report["final_posteriors"] = std::move(posteriors);

  json slopes = json::object();
  if (result.selected && result.trace.steps() >= 100) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      if (i == *result.selected) continue;
      const LyapunovEstimate est = lyapunov_estimate(result.trace, i, *result.selected);
      json entry;
      entry["slope"] = est.frozen && std::isinf(est.slope) ? json(nullptr) : json(est.slope);
      entry["std_error"] = est.std_error;
      entry["frozen"] = est.frozen;
      slopes[set.candidate(i).label] = std::move(entry);
    }
  }
  report["lyapunov_vs_selected"] = std::move(slopes);

  const std::string text = report.dump(2) + "\n";
  std::cout << text;
  if (!args.report_out.empty()) {
    write_file_atomic(resolve_output_path(args.report_out), text);
  }
}

// ---------------------------------------------------------------------------

struct RefineArgs {
  std::string record_path;
  std::string registry = "paper-example-5.2";
  std::vector<double> interval = {0.0, 3.0};
  double epsilon = 0.01;
  double delta = 0.0;
  std::uint64_t max_rounds = 64;
  std::string out;
  std::string summary_out;
};

void run_refine(const RefineArgs& args) {
  if (args.interval.size() != 2) throw ValidationError("--interval needs two values u,v");
  const TrajectoryRecord record = load_record(args.record_path);
  RefineConfig config;
  config.lower = args.interval[0];
  config.upper = args.interval[1];
  config.epsilon = args.epsilon;
  config.delta = args.delta;
  config.max_rounds = args.max_rounds;

  const RefinementTrace trace = refine(record, registry_entry(args.registry), config);

  if (!args.out.empty()) {
    std::ostringstream csv;
    csv << "round,a,b,selected,steps_used,pi_a_final,pi_b_final\n";
    for (std::size_t k = 0; k < trace.rounds.size(); ++k) {
      const RefineRound& r = trace.rounds[k];
      const char* sel = r.selected == 0 ? "a" : (r.selected == 1 ? "b" : "none");
      csv << (k + 1) << "," << fmt_double(r.a) << "," << fmt_double(r.b) << "," << sel << ","
          << r.steps_used << "," << fmt_double(r.pi_a) << "," << fmt_double(r.pi_b) << "\n";
    }
    write_file_atomic(resolve_output_path(args.out), csv.str());
  }

  json summary;
  summary["estimate"] = trace.estimate;
  summary["terminated_reason"] = trace.terminated_reason;
  summary["ambiguous"] = trace.ambiguous;
  summary["warnings"] = trace.warnings;
  json rounds = json::array();
  for (const auto& r : trace.rounds) {
    json round;
    round["a"] = r.a;
    round["b"] = r.b;
    round["raw_a"] = r.raw_a;
    round["raw_b"] = r.raw_b;
    round["selected"] = r.selected == 0 ? "a" : (r.selected == 1 ? "b" : "none");
    round["steps_used"] = r.steps_used;
    round["pi_a"] = r.pi_a;
    round["pi_b"] = r.pi_b;
    rounds.push_back(std::move(round));
  }
  summary["rounds"] = std::move(rounds);

  const std::string text = summary.dump(2) + "\n";
  std::cout << text;
  if (!args.summary_out.empty()) {
    write_file_atomic(resolve_output_path(args.summary_out), text);
  }
}

// ---------------------------------------------------------------------------

void run_analyze(const ModelSource& source, const std::string& out_path) {
  const KrausModel model = source.load();
  const ChannelDecomposition dec = decompose(model);

  json doc;
  doc["dim"] = model.dim();
  doc["faithful"] = dec.faithful;
  doc["subspace_count"] = dec.count();
  doc["warnings"] = dec.warnings;
  json subspaces = json::array();
  for (const auto& sub : dec.subspaces) {
    json entry;
    entry["dim"] = sub.dim;
    entry["projector"] = matrix_json(sub.projector);
    entry["invariant_state"] = matrix_json(sub.invariant_state);
    subspaces.push_back(std::move(entry));
  }
  doc["subspaces"] = std::move(subspaces);
  doc["maximal_invariant_state"] = matrix_json(dec.maximal_invariant_state);

  const std::string text = doc.dump(2) + "\n";
  std::cout << text;
  if (!out_path.empty()) write_file_atomic(resolve_output_path(out_path), text);
}

// ---------------------------------------------------------------------------

struct PairArgs {
  ModelSource model_a;
  ModelSource model_b;
  std::string registry;
  std::vector<double> params;

  std::pair<KrausModel, KrausModel> load() const {
    if (!registry.empty()) {
      if (params.size() != 2) {
        throw ValidationError("--params needs exactly two values with --registry");
      }
      const ModelRegistryEntry& entry = registry_entry(registry);
      return {entry.make(std::span<const double>(&params[0], 1)),
              entry.make(std::span<const double>(&params[1], 1))};
    }
    return {model_a.load(), model_b.load()};
  }
};

void run_identifiability(const PairArgs& pair, int max_len, const std::string& out_path) {
  const auto [model_a, model_b] = pair.load();
  const IdentifiabilityResult result = check_identifiability(model_a, model_b, max_len);

  json doc;
  doc["decided"] = result.decided;
  doc["max_len"] = max_len;
  json pairs = json::array();
  for (const auto& p : result.pairs) {
    json entry;
    entry["subspace_a"] = p.subspace_a;
    entry["subspace_b"] = p.subspace_b;
    entry["separated"] = p.separated;
    entry["margin"] = p.margin;
    if (p.separated) {
      json word = json::array();
      for (const std::size_t y : p.witness) word.push_back(model_a.outcome_labels()[y]);
      entry["witness"] = std::move(word);
      entry["witness_prob_a"] = p.witness_prob_a;
      entry["witness_prob_b"] = p.witness_prob_b;
    } else {
      entry["witness"] = nullptr;
    }
    pairs.push_back(std::move(entry));
  }
  doc["pairs"] = std::move(pairs);

  const std::string text = doc.dump(2) + "\n";
  std::cout << text;
  if (!out_path.empty()) write_file_atomic(resolve_output_path(out_path), text);
}

struct EntropyArgs {
  PairArgs pair;
  std::string init_p = "invariant";
  std::string init_q = "invariant";
  int n = 10;
  std::int64_t samples = 10000;
  std::uint64_t seed = 0;
  std::string out;
};

void run_entropy_rate(const EntropyArgs& args) {
  const auto [model_p, model_q] = args.pair.load();
  const DensityMatrix state_p = initial_state(args.init_p, model_p);
  const DensityMatrix state_q = initial_state(args.init_q, model_q);

  const EntropyRateEstimate est =
      entropy_rate(model_p, state_p, model_q, state_q, args.n, args.samples, args.seed);

  json doc;
  doc["n"] = est.word_length;
  doc["sample_count"] = est.sample_count;
  doc["exhaustive"] = est.exhaustive;
  doc["infinite"] = est.infinite;
  doc["estimate"] = est.infinite ? json(nullptr) : json(est.estimate);
  doc["standard_error"] = est.standard_error;

  const std::string text = doc.dump(2) + "\n";
  std::cout << text;
  if (!args.out.empty()) write_file_atomic(resolve_output_path(args.out), text);
}

int error_exit(const char* type, const std::string& message, int code) {
  json err;
  err["error"]["type"] = type;
  err["error"]["message"] = message;
  std::cerr << err.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum trajectory simulation and parameter estimation"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "sample a measurement record");
  sim.model.add_options(simulate);
  simulate->add_option("--init", sim.init, "initial state: mixed | invariant | <file>");
  simulate->add_option("--steps", sim.steps, "number of measurement steps");
  simulate->add_option("--seed", sim.seed, "generator seed");
  simulate->add_option("--out", sim.out, "record output file")->required();
  simulate->add_option("--states-out", sim.states_out, "per-step state CSV");
  simulate->add_option("--repeat", sim.repeat, "run this many consecutive seeds");
  simulate->add_option("--jobs", sim.jobs, "parallel workers for --repeat");

  DiscriminateArgs dis;
  auto* discriminate = app.add_subcommand("discriminate", "multi-hypothesis selection");
  discriminate->add_option("--record", dis.record_path, "measurement record")->required();
  discriminate->add_option("--registry", dis.registry, "registry for --candidates");
  discriminate->add_option("--candidates", dis.candidates, "candidate parameter values")
      ->delimiter(',');
  discriminate->add_option("--candidate-models", dis.candidate_models, "candidate model files")
      ->delimiter(',');
  discriminate->add_option("--prior", dis.prior, "uniform or v1,v2,...");
  discriminate->add_option("--epsilon", dis.epsilon, "selection threshold");
  discriminate->add_option("--init", dis.init, "initial estimate: mixed | <file>");
  discriminate->add_option("--max-steps", dis.max_steps, "cap on consumed outcomes");
  discriminate->add_option("--out", dis.out, "posterior CSV output");
  discriminate->add_option("--report-out", dis.report_out, "also write the report JSON here");

  RefineArgs ref;
  auto* refine_cmd = app.add_subcommand("refine", "interval refinement estimation");
  refine_cmd->add_option("--record", ref.record_path, "measurement record")->required();
  refine_cmd->add_option("--registry", ref.registry, "parametric model family");
  refine_cmd->add_option("--interval", ref.interval, "search interval u,v")->delimiter(',');
  refine_cmd->add_option("--epsilon", ref.epsilon, "selection threshold");
  refine_cmd->add_option("--delta", ref.delta, "resolution floor (default (v-u)/1000)");
  refine_cmd->add_option("--max-rounds", ref.max_rounds, "round cap");
  refine_cmd->add_option("--out", ref.out, "round CSV output");
  refine_cmd->add_option("--summary-out", ref.summary_out, "also write the summary JSON here");

  ModelSource analyze_src;
  std::string analyze_out;
  auto* analyze = app.add_subcommand("analyze", "channel structure report");
  analyze_src.add_options(analyze);
  analyze->add_option("--out", analyze_out, "also write the report JSON here");

  PairArgs ident_pair;
  int ident_len = 6;
  std::string ident_out;
  auto* ident = app.add_subcommand("identifiability", "word-distribution separation check");
  ident_pair.model_a.add_options(ident, "a");
  ident_pair.model_b.add_options(ident, "b");
  ident->add_option("--registry", ident_pair.registry, "registry for --params");
  ident->add_option("--params", ident_pair.params, "two parameter values")->delimiter(',');
  ident->add_option("--max-len", ident_len, "maximum word length");
  ident->add_option("--out", ident_out, "also write the report JSON here");

  EntropyArgs ent;
  auto* entropy = app.add_subcommand("entropy-rate", "relative entropy rate estimate");
  ent.pair.model_a.add_options(entropy, "a");
  ent.pair.model_b.add_options(entropy, "b");
  entropy->add_option("--registry", ent.pair.registry, "registry for --params");
  entropy->add_option("--params", ent.pair.params, "two parameter values")->delimiter(',');
  entropy->add_option("--init-p", ent.init_p, "state for the sampling model");
  entropy->add_option("--init-q", ent.init_q, "state for the reference model");
  entropy->add_option("--n", ent.n, "word length");
  entropy->add_option("--samples", ent.samples, "Monte Carlo sample count");
  entropy->add_option("--seed", ent.seed, "sampler seed");
  entropy->add_option("--out", ent.out, "also write the estimate JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return error_exit("validation", e.what(), 2);
  }

  try {
    if (simulate->parsed()) run_simulate(sim);
    if (discriminate->parsed()) run_discriminate(dis);
    if (refine_cmd->parsed()) run_refine(ref);
    if (analyze->parsed()) run_analyze(analyze_src, analyze_out);
    if (ident->parsed()) run_identifiability(ident_pair, ident_len, ident_out);
    if (entropy->parsed()) run_entropy_rate(ent);
  } catch (const ValidationError& e) {
    return error_exit("validation", e.what(), 2);
  } catch (const NumericalError& e) {
    return error_exit("numerical", e.what(), 3);
  } catch (const IoError& e) {
    return error_exit("io", e.what(), 4);
  } catch (const std::exception& e) {
    return error_exit("internal", e.what(), 1);
  }
  return 0;
}
