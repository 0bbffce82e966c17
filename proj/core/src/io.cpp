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

#include "prunesolve/io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "prunesolve/error.hpp"

namespace prunesolve {
namespace {

using Json = nlohmann::ordered_json;

Json ParseJson(std::string_view text, std::string_view what) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::kParse,
                std::string(what) + ": " + e.what());
  }
}

[[noreturn]] void Malformed(std::string_view what, const std::string& detail) {
  throw Error(ErrorCode::kParse, std::string(what) + ": " + detail);
}

template <typename T>
T Get(const Json& obj, const char* key, std::string_view what) {
  if (!obj.is_object() || !obj.contains(key)) {
    Malformed(what, std::string("missing key '") + key + "'");
  }
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception& e) {
    Malformed(what, std::string("bad value for '") + key + "': " + e.what());
  }
}

template <typename T>
T GetOr(const Json& obj, const char* key, T fallback, std::string_view what) {
  if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
  return Get<T>(obj, key, what);
}

std::vector<std::uint8_t> Bits(const Json& arr, std::string_view what) {
  if (!arr.is_array()) Malformed(what, "expected an array of 0/1");
  std::vector<std::uint8_t> out;
  out.reserve(arr.size());
  for (const Json& b : arr) {
    if (!b.is_number_integer() || (b.get<int>() != 0 && b.get<int>() != 1)) {
      Malformed(what, "bits must be the integers 0 or 1");
    }
    out.push_back(static_cast<std::uint8_t>(b.get<int>()));
  }
  return out;
}

Json BitArray(std::span<const std::uint8_t> bits) {
  Json arr = Json::array();
  for (std::uint8_t b : bits) arr.push_back(static_cast<int>(b));
  return arr;
}

void FlattenNested(const Json& node, std::vector<double>& out,
                   std::string_view what) {
  if (node.is_array()) {
    for (const Json& child : node) FlattenNested(child, out, what);
  } else if (node.is_number()) {
    out.push_back(node.get<double>());
  } else {
    Malformed(what, "tensor values must be numbers");
  }
}

Json Nested(const Tensor4<double>& t) {
  const Shape4& s = t.shape();
  Json out = Json::array();
  for (int i = 0; i < s.d0; ++i) {
    Json ji = Json::array();
    for (int j = 0; j < s.d1; ++j) {
      Json ja = Json::array();
      for (int a = 0; a < s.d2; ++a) {
        Json jb = Json::array();
        for (int b = 0; b < s.d3; ++b) jb.push_back(t.at(i, j, a, b));
        ja.push_back(std::move(jb));
      }
      ji.push_back(std::move(ja));
    }
    out.push_back(std::move(ji));
  }
  return out;
}

std::vector<double> ReadFloat32(const std::filesystem::path& path,
                                std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kIo, "cannot open " + path.string());
  }
  std::vector<char> raw((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
  if (raw.size() != count * 4) {
    throw Error(ErrorCode::kShapeMismatch,
                path.string() + " holds " + std::to_string(raw.size()) +
                    " bytes, expected " + std::to_string(count * 4));
  }
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::uint32_t word = 0;
    for (int byte = 3; byte >= 0; --byte) {
      word = (word << 8) |
             static_cast<std::uint8_t>(raw[k * 4 + static_cast<std::size_t>(byte)]);
    }
    out[k] = static_cast<double>(std::bit_cast<float>(word));
  }
  return out;
}

Json ChannelList(const std::vector<std::uint8_t>& flags) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) arr.push_back(static_cast<int>(i));
  }
  return arr;
}

Json FlagsJson(const ChannelFlags& flags) {
  Json out = Json::array();
  for (std::size_t t = 0; t < flags.u.size(); ++t) {
    out.push_back(Json{{"t", static_cast<int>(t)},
                       {"u", ChannelList(flags.u[t])},
                       {"v", ChannelList(flags.v[t])}});
  }
  return out;
}

TimingModel ModelFromJson(const Json& j) {
  constexpr std::string_view kWhat = "timing model";
  TimingModel m;
  m.layer = Get<int>(j, "layer", kWhat);
  m.family = ParseTimingFamily(Get<std::string>(j, "family", kWhat));
  m.alpha = GetOr<double>(j, "alpha", 0.0, kWhat);
  m.beta = GetOr<double>(j, "beta", 0.0, kWhat);
  m.gamma = GetOr<double>(j, "gamma", 0.0, kWhat);
  m.delta = GetOr<double>(j, "delta", 0.0, kWhat);
  m.mpe = GetOr<double>(j, "mpe", 0.0, kWhat);
  m.r_squared = GetOr<double>(j, "r_squared", 0.0, kWhat);
  m.orthogonality = GetOr<double>(j, "orthogonality", 0.0, kWhat);
  return m;
}

}  // namespace

std::string ReadTextFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteTextFile(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "write failed: " + path.string());
}

NetworkSpec ParseNetwork(std::string_view text) {
  constexpr std::string_view kWhat = "network";
  const Json doc = ParseJson(text, kWhat);
  if (!doc.is_object()) Malformed(kWhat, "expected an object");
  const int input_channels = Get<int>(doc, "input_channels", kWhat);
  const bool prune_input = GetOr<bool>(doc, "prune_input_channels", false, kWhat);
  const Json& layers_json = doc.contains("layers") ? doc.at("layers") : Json();
  if (!layers_json.is_array()) Malformed(kWhat, "'layers' must be an array");

  std::vector<LayerSpec> layers;
  for (const Json& l : layers_json) {
    LayerSpec s;
    s.id = Get<int>(l, "id", kWhat);
    s.c_in = Get<int>(l, "c_in", kWhat);
    s.c_out = Get<int>(l, "c_out", kWhat);
    s.kernel = GetOr<int>(l, "kernel", 1, kWhat);
    s.stride = GetOr<int>(l, "stride", 1, kWhat);
    s.h_in = GetOr<int>(l, "h_in", 1, kWhat);
    s.w_in = GetOr<int>(l, "w_in", 1, kWhat);
    s.h_out = GetOr<int>(l, "h_out", 1, kWhat);
    s.w_out = GetOr<int>(l, "w_out", 1, kWhat);
    if (l.contains("padding") && !l.at("padding").is_null()) {
      s.padding = Get<int>(l, "padding", kWhat);
    }
    layers.push_back(s);
  }
  std::vector<SkipAddition> skips;
  if (doc.contains("skip_additions")) {
    for (const Json& a : doc.at("skip_additions")) {
      skips.push_back(SkipAddition{Get<int>(a, "s", kWhat), Get<int>(a, "t", kWhat),
                                   ParseSkipKind(Get<std::string>(a, "kind", kWhat))});
    }
  }
  std::vector<SkipConcat> concats;
  if (doc.contains("skip_concats")) {
    for (const Json& c : doc.at("skip_concats")) {
      SkipConcat sc{Get<int>(c, "p", kWhat), Get<int>(c, "q", kWhat), {}};
      if (c.contains("kernel") && !c.at("kernel").is_null()) {
        sc.kernel = Get<int>(c, "kernel", kWhat);
      }
      concats.push_back(sc);
    }
  }
  return NetworkSpec(input_channels, std::move(layers), std::move(skips),
                     std::move(concats), prune_input);
}

NetworkSpec LoadNetwork(const std::filesystem::path& path) {
  return ParseNetwork(ReadTextFile(path));
}

std::string NetworkToJson(const NetworkSpec& net) {
  Json doc;
  doc["input_channels"] = net.input_channels();
  doc["prune_input_channels"] = net.prune_input_channels();
  Json layers = Json::array();
  for (const LayerSpec& l : net.layers()) {
    Json j{{"id", l.id},         {"c_in", l.c_in},   {"c_out", l.c_out},
           {"kernel", l.kernel}, {"stride", l.stride}, {"h_in", l.h_in},
           {"w_in", l.w_in},     {"h_out", l.h_out}, {"w_out", l.w_out}};
    if (l.padding) j["padding"] = *l.padding;
    layers.push_back(std::move(j));
  }
  doc["layers"] = std::move(layers);
  Json skips = Json::array();
  for (const SkipAddition& s : net.skip_additions()) {
    skips.push_back(Json{{"s", s.s}, {"t", s.t}, {"kind", ToString(s.kind)}});
  }
  doc["skip_additions"] = std::move(skips);
  Json concats = Json::array();
  for (const SkipConcat& c : net.skip_concats()) {
    concats.push_back(Json{{"p", c.p}, {"q", c.q}});
  }
  doc["skip_concats"] = std::move(concats);
  return doc.dump(2) + "\n";
}

ImportanceSet ParseImportance(std::string_view text,
                              const std::filesystem::path& base_dir,
                              const NetworkSpec& net) {
  constexpr std::string_view kWhat = "importance manifest";
  const Json doc = ParseJson(text, kWhat);
  const std::string source = GetOr<std::string>(doc, "source", "importance", kWhat);
  if (source != "importance" && source != "weights") {
    Malformed(kWhat, "source must be 'importance' or 'weights'");
  }
  const std::string norm_text =
      GetOr<std::string>(doc, "normalization", "none", kWhat);
  Normalization norm = Normalization::kNone;
  if (norm_text == "l2") {
    norm = Normalization::kL2;
  } else if (norm_text != "none") {
    Malformed(kWhat, "normalization must be 'l2' or 'none'");
  }
  if (!doc.contains("layers") || !doc.at("layers").is_array()) {
    Malformed(kWhat, "'layers' must be an array");
  }
  const int L = net.num_layers();
  ImportanceSet out(L);
  std::vector<bool> seen(L + 1, false);
  for (const Json& entry : doc.at("layers")) {
    const int layer = Get<int>(entry, "layer", kWhat);
    if (layer < 1 || layer > L) {
      throw Error(ErrorCode::kShapeMismatch,
                  "importance for unknown layer " + std::to_string(layer));
    }
    if (seen[layer]) {
      Malformed(kWhat, "layer " + std::to_string(layer) + " listed twice");
    }
    seen[layer] = true;
    const LayerSpec& spec = net.layer(layer);
    const Shape4 want{spec.c_in, spec.c_out, spec.kernel, spec.kernel};
    std::vector<double> values;
    if (entry.contains("values")) {
      FlattenNested(entry.at("values"), values, kWhat);
    } else if (entry.contains("file")) {
      const auto shape = Get<std::vector<int>>(entry, "shape", kWhat);
      if (shape.size() != 4) Malformed(kWhat, "shape needs four entries");
      const Shape4 declared{shape[0], shape[1], shape[2], shape[3]};
      if (!(declared == want)) {
        throw Error(ErrorCode::kShapeMismatch,
                    "layer " + std::to_string(layer) + " declares shape " +
                        ToString(declared) + ", expected " + ToString(want));
      }
      values = ReadFloat32(base_dir / Get<std::string>(entry, "file", kWhat),
                           want.size());
    } else {
      Malformed(kWhat, "layer " + std::to_string(layer) +
                           " needs 'values' or 'file'");
    }
    if (values.size() != want.size()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "layer " + std::to_string(layer) + " has " +
                      std::to_string(values.size()) + " values, expected " +
                      ToString(want));
    }
    Tensor4<double> tensor(want, std::move(values));
    if (source == "weights") {
      out[layer - 1] = ImportanceFromWeights(tensor, norm, layer);
    } else {
      out[layer - 1].layer = layer;
      out[layer - 1].values = std::move(tensor);
    }
  }
  for (int l = 1; l <= L; ++l) {
    if (!seen[l]) {
      throw Error(ErrorCode::kShapeMismatch,
                  "no importance for layer " + std::to_string(l));
    }
  }
  ValidateImportance(net, out);
  return out;
}

ImportanceSet LoadImportance(const std::filesystem::path& path,
                             const NetworkSpec& net) {
  return ParseImportance(ReadTextFile(path), path.parent_path(), net);
}

std::string ImportanceToJson(const ImportanceSet& importance) {
  Json doc;
  doc["source"] = "importance";
  doc["normalization"] = "none";
  Json layers = Json::array();
  for (const ImportanceTensor& t : importance) {
    layers.push_back(Json{{"layer", t.layer}, {"values", Nested(t.values)}});
  }
  doc["layers"] = std::move(layers);
  return doc.dump(1) + "\n";
}

PruningSolution ParseSolution(std::string_view text, const NetworkSpec& net,
                              SolutionEcho* echo) {
  constexpr std::string_view kWhat = "solution";
  const Json doc = ParseJson(text, kWhat);
  const int L = net.num_layers();
  PruningSolution sol;
  sol.mode = ParsePruneMode(Get<std::string>(doc, "mode", kWhat));
  if (!doc.contains("feature_maps") || !doc.at("feature_maps").is_array()) {
    Malformed(kWhat, "'feature_maps' must be an array");
  }
  const Json& maps = doc.at("feature_maps");
  if (static_cast<int>(maps.size()) != L + 1) {
    throw Error(ErrorCode::kShapeMismatch,
                "solution lists " + std::to_string(maps.size()) +
                    " feature maps, network has " + std::to_string(L + 1));
  }
  sol.u.resize(L + 1);
  sol.v.resize(L + 1);
  sol.q.resize(L + 1);
  bool any_q = false;
  for (const Json& fm : maps) {
    const int t = Get<int>(fm, "t", kWhat);
    if (t < 0 || t > L) Malformed(kWhat, "feature map index out of range");
    sol.u[t] = Bits(fm.contains("u") ? fm.at("u") : Json(), kWhat);
    sol.v[t] = fm.contains("v") ? Bits(fm.at("v"), kWhat) : sol.u[t];
    if (t == 0 || !fm.contains("q")) continue;
    any_q = true;
    const Json& q = fm.at("q");
    const auto edges = net.edges_into(t);
    if (!q.is_array()) Malformed(kWhat, "'q' must be an array");
    if (!q.empty() && q.front().is_array()) {
      for (const Json& slot : q) sol.q[t].push_back(Bits(slot, kWhat));
    } else {
      sol.q[t].push_back(Bits(q, kWhat));
    }
    if (sol.q[t].size() != edges.size()) {
      throw Error(ErrorCode::kShapeMismatch,
                  "layer " + std::to_string(t) + " has " +
                      std::to_string(edges.size()) + " source slots, q lists " +
                      std::to_string(sol.q[t].size()));
    }
  }
  if (!any_q) {
    if (sol.mode != PruneMode::kChannel) {
      Malformed(kWhat, "channel-spatial solutions must list q");
    }
    for (int t = 1; t <= L; ++t) {
      sol.q[t].assign(net.edges_into(t).size(), {});
      for (std::size_t s = 0; s < sol.q[t].size(); ++s) {
        sol.q[t][s].assign(static_cast<std::size_t>(net.columns(t)), 0);
      }
    }
    ValidateSolutionShape(net, sol);
    PinShapeColumns(net, sol);
  }
  ValidateSolutionShape(net, sol);
  if (echo != nullptr) {
    *echo = SolutionEcho{};
    if (doc.contains("objective") && doc.at("objective").is_number()) {
      echo->objective = doc.at("objective").get<double>();
    }
    if (doc.contains("usage") && doc.at("usage").is_number()) {
      echo->usage = doc.at("usage").get<double>();
    }
  }
  return sol;
}

PruningSolution LoadSolution(const std::filesystem::path& path,
                             const NetworkSpec& net, SolutionEcho* echo) {
  return ParseSolution(ReadTextFile(path), net, echo);
}

std::string SolutionToJson(const NetworkSpec& net, const PruningSolution& sol,
                           const SolutionEcho& echo) {
  Json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["mode"] = ToString(sol.mode);
  if (echo.objective) doc["objective"] = *echo.objective;
  if (echo.usage) doc["usage"] = *echo.usage;
  Json maps = Json::array();
  for (int t = 0; t <= net.num_layers(); ++t) {
    Json fm{{"t", t}, {"u", BitArray(sol.u[t])}, {"v", BitArray(sol.v[t])}};
    if (t > 0) {
      const auto edges = net.edges_into(t);
      if (edges.size() == 1) {
        fm["q"] = BitArray(sol.q[t][0]);
      } else {
        Json slots = Json::array();
        Json sources = Json::array();
        for (const Edge& e : edges) {
          slots.push_back(BitArray(sol.q[t][e.slot]));
          sources.push_back(e.source);
        }
        fm["q"] = std::move(slots);
        fm["q_sources"] = std::move(sources);
      }
    }
    maps.push_back(std::move(fm));
  }
  doc["feature_maps"] = std::move(maps);
  return doc.dump() + "\n";
}

namespace {

Json ResourceReportJson(const ResourceReport& report) {
  Json rows = Json::array();
  for (const ResourceRow& r : report.rows) {
    rows.push_back(Json{{"t", r.t},
                        {"a_u", r.a_u},
                        {"a_v", r.a_v},
                        {"b", r.b},
                        {"u_count", r.u_count},
                        {"v_count", r.v_count},
                        {"mask_norm", r.mask_norm},
                        {"contribution", r.contribution}});
  }
  return Json{{"schema_version", kSchemaVersion},
              {"kind", ToString(report.kind)},
              {"layers", std::move(rows)},
              {"usage", report.usage},
              {"constant", report.constant},
              {"total", report.total},
              {"budget", report.budget},
              {"slack", report.slack}};
}

}  // namespace

std::string ResourceReportToJson(const ResourceReport& report) {
  return ResourceReportJson(report).dump(2) + "\n";
}

std::string ActivityReportToJson(const NetworkSpec& net,
                                 const ActivityReport& report) {
  (void)net;
  Json inactive = Json::array();
  for (const WeightCoord& w : report.inactive) {
    inactive.push_back(Json::array({w.layer, w.i, w.j, w.a, w.b}));
  }
  Json doc{{"schema_version", kSchemaVersion},
           {"unpruned_weights", report.unpruned},
           {"inactive_count", static_cast<long long>(report.inactive.size())},
           {"inactive", std::move(inactive)},
           {"trivially_zero", FlagsJson(report.trivially_zero)},
           {"meaningless", FlagsJson(report.meaningless)}};
  return doc.dump(2) + "\n";
}

std::string SolveResultToJson(const NetworkSpec& net, const SolveResult& r,
                              const ResourceReport& report) {
  (void)net;
  Json doc{{"schema_version", kSchemaVersion},
           {"status", ToString(r.status)},
           {"objective", r.objective},
           {"usage", r.usage},
           {"inactive_weights", r.inactive_weights},
           {"stats",
            {{"nodes", r.stats.nodes},
             {"iterations", r.stats.iterations},
             {"levels", r.stats.levels},
             {"block_updates", r.stats.block_updates},
             {"wall_ms", r.stats.wall_ms}}},
           {"resources", ResourceReportJson(report)}};
  return doc.dump(2) + "\n";
}

std::vector<TimingSample> ParseSamplesCsv(std::string_view text) {
  std::vector<TimingSample> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!header) {
      if (line != "n_in,n_out,wall_clock_ms") {
        throw Error(ErrorCode::kParse,
                    "samples CSV must start with n_in,n_out,wall_clock_ms");
      }
      header = true;
      continue;
    }
    std::istringstream row(line);
    std::string a, b, c, extra;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') ||
        !std::getline(row, c, ',') || std::getline(row, extra, ',')) {
      throw Error(ErrorCode::kParse,
                  "samples CSV line " + std::to_string(line_no) +
                      ": expected three fields");
    }
    TimingSample s;
    try {
      std::size_t pa = 0, pb = 0, pc = 0;
      s.n_in = std::stoi(a, &pa);
      s.n_out = std::stoi(b, &pb);
      s.wall_clock_ms = std::stod(c, &pc);
      if (pa != a.size() || pb != b.size() || pc != c.size()) {
        throw std::invalid_argument("trailing characters");
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::kParse, "samples CSV line " +
                                         std::to_string(line_no) +
                                         ": malformed number");
    }
    if (s.n_in < 1 || s.n_out < 1 || !(s.wall_clock_ms > 0.0)) {
      throw Error(ErrorCode::kValidation,
                  "samples CSV line " + std::to_string(line_no) +
                      ": need n_in, n_out >= 1 and wall_clock_ms > 0");
    }
    out.push_back(s);
  }
  if (!header) throw Error(ErrorCode::kParse, "samples CSV is empty");
  return out;
}

std::vector<TimingSample> LoadSamplesCsv(const std::filesystem::path& path) {
  return ParseSamplesCsv(ReadTextFile(path));
}

std::string SamplesToCsv(std::span<const TimingSample> samples) {
  std::string out = "n_in,n_out,wall_clock_ms\n";
  char buf[64];
  for (const TimingSample& s : samples) {
    std::snprintf(buf, sizeof(buf), "%d,%d,%.17g\n", s.n_in, s.n_out,
                  s.wall_clock_ms);
    out += buf;
  }
  return out;
}

std::vector<TimingModel> ParseTimingModels(std::string_view text) {
  const Json doc = ParseJson(text, "timing models");
  std::vector<TimingModel> out;
  const Json* list = &doc;
  if (doc.is_object() && doc.contains("models")) list = &doc.at("models");
  if (list->is_array()) {
    for (const Json& m : *list) out.push_back(ModelFromJson(m));
  } else {
    out.push_back(ModelFromJson(*list));
  }
  return out;
}

std::vector<TimingModel> LoadTimingModels(const std::filesystem::path& path) {
  return ParseTimingModels(ReadTextFile(path));
}

std::string TimingModelsToJson(std::span<const TimingModel> models) {
  Json arr = Json::array();
  for (const TimingModel& m : models) {
    arr.push_back(Json{{"layer", m.layer},
                       {"family", ToString(m.family)},
                       {"alpha", m.alpha},
                       {"beta", m.beta},
                       {"gamma", m.gamma},
                       {"delta", m.delta},
                       {"mpe", m.mpe},
                       {"r_squared", m.r_squared},
                       {"orthogonality", m.orthogonality}});
  }
  Json doc{{"schema_version", kSchemaVersion}, {"models", std::move(arr)}};
  return doc.dump(2) + "\n";
}

}  // namespace prunesolve
