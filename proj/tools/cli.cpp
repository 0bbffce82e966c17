// Copyright 2026 The prunesolve Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "prunesolve/consistency.hpp"
#include "prunesolve/constraints.hpp"
#include "prunesolve/error.hpp"
#include "prunesolve/io.hpp"
#include "prunesolve/model.hpp"
#include "prunesolve/resources.hpp"
#include "prunesolve/solver.hpp"
#include "prunesolve/timing.hpp"

namespace prunesolve::cli {
namespace {

using Json = nlohmann::ordered_json;

struct Options {
  std::string network;
  std::string importance;
  std::string solution;
  std::string models;
  std::string out;
  std::vector<std::string> samples;
  std::vector<int> layers;
  std::string constraint = "size";
  std::optional<double> budget;
  std::string mode = "channel";
  std::string scheme = "ours";
  std::string algorithm = "exact";
  int block_size = 2;
  double gamma_step = 0.1;
  int max_iter = 10;
  int max_variables = 64;
  std::vector<int> keep_counts;
  std::uint64_t seed = 1;
  std::string family = "all";
  int kernel = 3;
  int stride = 1;
  int h_in = 32;
  int w_in = 32;
  double noise = 0.05;
  int n = 1;
  std::string count_scheme = "ours";
  bool brute_force = false;
};

int ExitFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInfeasibleBudget:
      return kInfeasible;
    case ErrorCode::kTooLarge:
      return kTooLarge;
    default:
      return kUsage;
  }
}

void Emit(const Options& o, const std::string& text, std::ostream& out) {
  if (o.out.empty()) {
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
  } else {
    WriteTextFile(o.out, text);
  }
}

std::vector<TimingModel> MaybeModels(const Options& o) {
  if (o.models.empty()) return {};
  return LoadTimingModels(o.models);
}

ResourceSpec MakeSpec(const Options& o, const NetworkSpec& net, double budget) {
  return Coefficients(net, ParseResourceKind(o.constraint), budget, MaybeModels(o));
}

Problem MakeProblem(const Options& o) {
  NetworkSpec net = LoadNetwork(o.network);
  ImportanceSet imp = LoadImportance(o.importance, net);
  ResourceSpec spec = MakeSpec(o, net, *o.budget);
  return Problem::Create(std::move(net), std::move(imp), std::move(spec),
                         ParsePruneMode(o.mode), ParseScheme(o.scheme));
}

int CmdPrune(const Options& o, std::ostream& out) {
  const Problem p = MakeProblem(o);
  SolveResult r;
  if (o.algorithm == "exact") {
    r = SolveExact(p, o.max_variables);
  } else if (o.algorithm == "bcd") {
    r = SolveBcd(p, BcdConfig{o.block_size, o.gamma_step, o.max_iter});
  } else if (o.algorithm == "oracle") {
    r = BruteForceOracle(p).best;
  } else {
    if (o.keep_counts.empty()) {
      throw Error(ErrorCode::kValidation, "greedy needs --keep-counts");
    }
    r = GreedyBaseline(p, o.keep_counts);
  }
  WriteTextFile(o.out, SolutionToJson(p.net(), r.solution,
                                      SolutionEcho{r.objective, r.usage}));
  const ResourceReport report = MakeReport(p.net(), r.solution, p.resource());
  out << SolveResultToJson(p.net(), r, report) << '\n';
  return kOk;
}

bool Close(double a, double b) {
  return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b));
}

int CmdVerify(const Options& o, bool has_constraint, std::ostream& out) {
  const NetworkSpec net = LoadNetwork(o.network);
  SolutionEcho echo;
  const PruningSolution sol = LoadSolution(o.solution, net, &echo);
  const ConstraintSet cs = BuildConstraints(net, sol.mode, ParseScheme(o.scheme));
  const FeasibilityReport fr = CheckFeasible(cs, sol);
  const ActivityReport act = FindInactiveWeights(net, MasksFromSolution(net, sol));

  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["mode"] = ToString(sol.mode);
  doc["feasible"] = fr.feasible();
  Json violations = Json::array();
  for (const Violation& v : fr.violations) {
    violations.push_back({{"tag", ToString(v.tag)}, {"t", v.t}, {"detail", v.detail}});
  }
  doc["violations"] = std::move(violations);
  doc["activity"] = Json::parse(ActivityReportToJson(net, act));

  bool ok = fr.feasible();
  std::vector<std::string> mismatches;
  if (!o.importance.empty()) {
    const double objective =
        ObjectiveValue(net, LoadImportance(o.importance, net), sol);
    doc["objective"] = objective;
    if (echo.objective && !Close(*echo.objective, objective)) {
      mismatches.push_back("objective");
    }
  }
  if (has_constraint) {
    const ResourceSpec spec = MakeSpec(o, net, o.budget.value_or(0.0));
    const double usage = Usage(net, sol, spec);
    doc["constraint"] = o.constraint;
    doc["usage"] = usage;
    if (echo.usage && !Close(*echo.usage, usage)) mismatches.push_back("usage");
    if (o.budget) {
      const bool within = usage <= spec.effective_budget() + 1e-9;
      doc["budget"] = *o.budget;
      doc["within_budget"] = within;
      ok = ok && within;
    }
  }
  doc["echo_mismatches"] = mismatches;
  ok = ok && mismatches.empty();
  Emit(o, doc.dump(2), out);
  if (!act.clean()) return kInactive;
  return ok ? kOk : kUsage;
}

int CmdFitTiming(const Options& o, std::ostream& out) {
  if (!o.layers.empty() && o.layers.size() != o.samples.size()) {
    throw Error(ErrorCode::kValidation, "--layer must be given once per --samples");
  }
  std::vector<TimingFamily> families;
  if (o.family == "all") {
    families.assign(std::begin(kAllFamilies), std::end(kAllFamilies));
  } else {
    families.push_back(ParseTimingFamily(o.family));
  }
  std::vector<TimingModel> chosen;
  std::vector<TimingModel> all;
  for (std::size_t k = 0; k < o.samples.size(); ++k) {
    const int layer = o.layers.empty() ? static_cast<int>(k) + 1 : o.layers[k];
    const std::vector<TimingSample> samples = LoadSamplesCsv(o.samples[k]);
    std::vector<TimingModel> fits;
    for (TimingFamily f : families) fits.push_back(FitModel(samples, f, layer));
    std::stable_sort(fits.begin(), fits.end(),
                     [](const TimingModel& a, const TimingModel& b) {
                       return a.mpe < b.mpe;
                     });
    chosen.push_back(fits.front());
    all.insert(all.end(), fits.begin(), fits.end());
  }
  WriteTextFile(o.out, TimingModelsToJson(chosen));
  out << "layer  family  mpe       r_squared\n";
  for (const TimingModel& m : all) {
    std::ostringstream line;
    line << std::left << std::setw(7) << m.layer << std::setw(8) << ToString(m.family)
         << std::fixed << std::setprecision(6) << std::setw(10) << m.mpe
         << m.r_squared << '\n';
    out << line.str();
  }
  return kOk;
}

int CmdEstimateTime(const Options& o, std::ostream& out) {
  const NetworkSpec net = LoadNetwork(o.network);
  const std::vector<TimingModel> models = LoadTimingModels(o.models);
  const PruningSolution sol = o.solution.empty()
                                  ? PruningSolution::AllOnes(net, PruneMode::kChannel)
                                  : LoadSolution(o.solution, net);
  const NetworkEstimate est = EstimateNetwork(models, net, sol);
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["total_ms"] = est.total_ms;
  doc["per_layer_ms"] = est.per_layer_ms;
  Emit(o, doc.dump(2), out);
  return kOk;
}

int CmdOracle(const Options& o, std::ostream& out) {
  const Problem p = MakeProblem(o);
  const OracleResult r = BruteForceOracle(p);
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["objective"] = r.best.objective;
  doc["usage"] = r.best.usage;
  doc["argmax_count"] = r.optima.size();
  doc["feasible_count"] = r.feasible_count;
  out << doc.dump(2) << '\n';
  if (!o.out.empty()) {
    WriteTextFile(o.out, SolutionToJson(p.net(), r.best.solution,
                                        SolutionEcho{r.best.objective, r.best.usage}));
  }
  return kOk;
}

int CmdSynth(const Options& o, std::ostream& out) {
  const LayerGeometry g{o.kernel, o.stride, o.h_in, o.w_in};
  Emit(o, SamplesToCsv(SynthSamples(g, CoefficientLaw{}, o.noise, o.seed)), out);
  return kOk;
}

int CmdStandardForm(const Options& o, std::ostream& out) {
  const NetworkSpec net = LoadNetwork(o.network);
  const ImportanceSet imp = LoadImportance(o.importance, net);
  std::vector<FilterImportance> filters;
  for (const ImportanceTensor& t : imp) filters.push_back(ComputeFilterImportance(t));
  const StandardForm form =
      BuildStandardForm(net, filters, MakeSpec(o, net, o.budget.value_or(0.0)));
  std::ostringstream text;
  DumpStandardForm(form, text);
  Emit(o, text.str(), out);
  return kOk;
}

int CmdCount(const Options& o, std::ostream& out) {
  const AssignmentScheme scheme = ParseAssignmentScheme(o.count_scheme);
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["n"] = o.n;
  doc["scheme"] = ToString(scheme);
  doc["method"] = o.brute_force ? "enumeration" : "closed_form";
  doc["count"] = o.brute_force ? BruteForceJointAssignments(o.n, scheme)
                               : CountJointAssignments(o.n, scheme);
  out << doc.dump(2) << '\n';
  return kOk;
}

}  // namespace

int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Options o;
  CLI::App app{"Resource-constrained channel and shape-column pruning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "prunesolve 0.1.0");

  const std::vector<std::string> kinds{"size", "memory", "flops", "time"};
  const std::vector<std::string> modes{"channel", "channel-spatial", "channel_spatial"};
  const std::vector<std::string> schemes{"ours", "gbn"};

  auto network = [&](CLI::App* c) {
    c->add_option("--network", o.network, "network document")
        ->required()
        ->check(CLI::ExistingFile);
  };
  auto problem = [&](CLI::App* c) {
    network(c);
    c->add_option("--importance", o.importance, "importance manifest")
        ->required()
        ->check(CLI::ExistingFile);
    c->add_option("--constraint", o.constraint, "resource kind")
        ->check(CLI::IsMember(kinds))
        ->capture_default_str();
    c->add_option("--budget", o.budget, "resource budget")->required();
    c->add_option("--mode", o.mode, "pruning mode")
        ->check(CLI::IsMember(modes))
        ->capture_default_str();
    c->add_option("--scheme", o.scheme, "skip-addition scheme")
        ->check(CLI::IsMember(schemes))
        ->capture_default_str();
    c->add_option("--models", o.models, "timing models (time constraint)")
        ->check(CLI::ExistingFile);
  };

  CLI::App* prune = app.add_subcommand("prune", "solve for a pruning solution");
  problem(prune);
  prune->add_option("--algorithm", o.algorithm, "solver")
      ->check(CLI::IsMember({"exact", "bcd", "oracle", "greedy"}))
      ->capture_default_str();
  prune->add_option("--block-size", o.block_size, "layers per block")
      ->capture_default_str();
  prune->add_option("--gamma-step", o.gamma_step, "annealing step")
      ->capture_default_str();
  prune->add_option("--max-iter", o.max_iter, "sweeps per budget level")
      ->capture_default_str();
  prune->add_option("--max-variables", o.max_variables, "exact solver cap")
      ->capture_default_str();
  prune->add_option("--keep-counts", o.keep_counts, "greedy channels per layer")
      ->delimiter(',');
  prune->add_option("--out", o.out, "solution document")->required();

  CLI::App* verify = app.add_subcommand("verify", "check a solution");
  network(verify);
  verify->add_option("--solution", o.solution, "solution document")
      ->required()
      ->check(CLI::ExistingFile);
  verify->add_option("--importance", o.importance, "importance manifest")
      ->check(CLI::ExistingFile);
  CLI::Option* verify_kind =
      verify->add_option("--constraint", o.constraint, "resource kind")
          ->check(CLI::IsMember(kinds));
  verify->add_option("--budget", o.budget, "resource budget")->needs(verify_kind);
  verify->add_option("--scheme", o.scheme, "skip-addition scheme")
      ->check(CLI::IsMember(schemes))
      ->capture_default_str();
  verify->add_option("--models", o.models, "timing models")->check(CLI::ExistingFile);
  verify->add_option("--out", o.out, "report document");

  CLI::App* fit = app.add_subcommand("fit-timing", "fit latency models");
  fit->add_option("--samples", o.samples, "samples CSV, one per layer")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_option("--layer", o.layers, "layer id of each --samples");
  fit->add_option("--family", o.family, "M1..M6 or all")->capture_default_str();
  fit->add_option("--out", o.out, "timing model document")->required();

  CLI::App* estimate = app.add_subcommand("estimate-time", "estimate latency");
  network(estimate);
  estimate->add_option("--models", o.models, "timing models")
      ->required()
      ->check(CLI::ExistingFile);
  estimate->add_option("--solution", o.solution, "solution (default all ones)")
      ->check(CLI::ExistingFile);
  estimate->add_option("--out", o.out, "estimate document");

  CLI::App* oracle = app.add_subcommand("oracle", "exhaustive optimum");
  problem(oracle);
  oracle->add_option("--out", o.out, "best solution document");

  CLI::App* synth = app.add_subcommand("synth-samples", "synthetic latency samples");
  synth->add_option("--kernel", o.kernel)->capture_default_str();
  synth->add_option("--stride", o.stride)->capture_default_str();
  synth->add_option("--h-in", o.h_in)->capture_default_str();
  synth->add_option("--w-in", o.w_in)->capture_default_str();
  synth->add_option("--noise", o.noise, "relative noise")->capture_default_str();
  synth->add_option("--seed", o.seed)->capture_default_str();
  synth->add_option("--out", o.out, "samples CSV");

  CLI::App* standard = app.add_subcommand("standard-form", "dump the standard form");
  network(standard);
  standard->add_option("--importance", o.importance, "importance manifest")
      ->required()
      ->check(CLI::ExistingFile);
  standard->add_option("--constraint", o.constraint, "resource kind")
      ->check(CLI::IsMember(kinds))
      ->capture_default_str();
  standard->add_option("--budget", o.budget, "resource budget");
  standard->add_option("--models", o.models, "timing models")->check(CLI::ExistingFile);
  standard->add_option("--out", o.out, "text dump");

  CLI::App* count = app.add_subcommand("count-assignments", "joint assignment counts");
  count->add_option("--n", o.n, "channels on the skip edge")->required();
  count->add_option("--scheme", o.count_scheme, "free, gbn or ours")
      ->check(CLI::IsMember({"free", "gbn", "ours"}))
      ->capture_default_str();
  count->add_flag("--brute-force", o.brute_force, "enumerate instead");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*prune) return CmdPrune(o, out);
    if (*verify) return CmdVerify(o, verify_kind->count() > 0, out);
    if (*fit) return CmdFitTiming(o, out);
    if (*estimate) return CmdEstimateTime(o, out);
    if (*oracle) return CmdOracle(o, out);
    if (*synth) return CmdSynth(o, out);
    if (*standard) return CmdStandardForm(o, out);
    if (*count) return CmdCount(o, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return ExitFor(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace prunesolve::cli
