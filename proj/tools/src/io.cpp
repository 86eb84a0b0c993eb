#include "cartan_sync_cli/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cartan_sync/error.hpp"

namespace cartan_sync::cli {
namespace {

using nlohmann::json;

[[noreturn]] void Malformed(const std::string& what) { throw Error(ErrorCode::kConfigInvalid, what); }

json MatrixJson(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json VectorJson(const Vector& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

double Number(const json& j, const char* what) {
  if (!j.is_number()) Malformed(std::string(what) + " must be a number");
  return j.get<double>();
}

Matrix ParseMatrix(const json& j, int rows, int cols, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    Malformed(std::string(what) + " must have " + std::to_string(rows) + " rows");
  }
  Matrix m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    const json& row = j[r];
    if (!row.is_array() || static_cast<int>(row.size()) != cols) {
      Malformed(std::string(what) + " must have " + std::to_string(cols) + " columns");
    }
    for (int c = 0; c < cols; ++c) m(r, c) = Number(row[c], what);
  }
  return m;
}

Vector ParseVector(const json& j, int size, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) != size) {
    Malformed(std::string(what) + " must have " + std::to_string(size) + " entries");
  }
  Vector v(size);
  for (int k = 0; k < size; ++k) v(k) = Number(j[k], what);
  return v;
}

const json& Field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) Malformed(std::string("missing field '") + key + "'");
  return j.at(key);
}

int IntField(const json& j, const char* key) {
  const json& v = Field(j, key);
  if (!v.is_number_integer()) Malformed(std::string("field '") + key + "' must be an integer");
  return v.get<int>();
}

json GroupJson(const GroupSpec& g) {
  json out{{"kind", std::string(GroupKindName(g.kind))}, {"d", g.d}};
  if (g.kind == GroupKind::kMMG) out["l"] = g.l;
  return out;
}

GroupSpec ParseGroup(const json& j) {
  const json& kind = Field(j, "kind");
  if (!kind.is_string()) Malformed("group kind must be a string");
  GroupSpec g;
  g.kind = ParseGroupKind(kind.get<std::string>());
  g.d = IntField(j, "d");
  g.l = g.kind == GroupKind::kMMG ? IntField(j, "l") : 0;
  if (g.d < 1 || (g.kind == GroupKind::kMMG && g.l < 1)) Malformed("group dimensions must be positive");
  return g;
}

json ElementJson(const GroupElement& g) {
  if (const auto* se = std::get_if<RigidMotion>(&g)) {
    return json{{"mu", MatrixJson(se->mu.matrix())}, {"b", VectorJson(se->b)}};
  }
  if (const auto* m = std::get_if<MMGElement>(&g)) {
    return json{{"mu", MatrixJson(m->mu.matrix())}, {"eta", MatrixJson(m->eta.matrix())}, {"B", MatrixJson(m->B)}};
  }
  return json{{"mu", MatrixJson(std::get<Rotation>(g).matrix())}};
}

GroupElement ParseElement(const json& j, const GroupSpec& g) {
  const Matrix mu = ParseMatrix(Field(j, "mu"), g.d, g.d, "mu");
  switch (g.kind) {
    case GroupKind::kSE:
      return RigidMotion(Rotation(mu, true), ParseVector(Field(j, "b"), g.d, "b"));
    case GroupKind::kMMG:
      return MMGElement(Rotation(mu, false), Rotation(ParseMatrix(Field(j, "eta"), g.l, g.l, "eta"), false),
                        ParseMatrix(Field(j, "B"), g.d, g.l, "B"));
    case GroupKind::kSO:
      return Rotation(mu, true);
    case GroupKind::kO:
      return Rotation(mu, false);
  }
  Malformed("unknown group");
}

json ElementsJson(const std::vector<GroupElement>& elements) {
  json out = json::array();
  for (const GroupElement& g : elements) out.push_back(ElementJson(g));
  return out;
}

std::vector<GroupElement> ParseElements(const json& j, const GroupSpec& g, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n) Malformed("expected " + std::to_string(n) + " elements");
  std::vector<GroupElement> out;
  out.reserve(n);
  for (const json& e : j) out.push_back(ParseElement(e, g));
  return out;
}

json NumberOrNull(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

double NumberOr(const json& j, const char* key, double fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return Number(j.at(key), key);
}

json MetaJson(const GraphMeta& m) {
  return json{{"p", m.p}, {"snr_db", NumberOrNull(m.snr_db)}, {"outlier_rate", m.outlier_rate},
              {"trial", m.trial}, {"seed", m.seed}};
}

GraphMeta ParseMeta(const json& j) {
  GraphMeta m;
  m.p = NumberOr(j, "p", 1.0);
  m.snr_db = NumberOr(j, "snr_db", std::numeric_limits<double>::infinity());
  m.outlier_rate = NumberOr(j, "outlier_rate", 0.0);
  if (j.contains("trial")) m.trial = IntField(j, "trial");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer()) Malformed("seed must be an integer");
    m.seed = j.at("seed").get<std::uint64_t>();
  }
  return m;
}

json Parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    Malformed(std::string("malformed JSON: ") + e.what());
  }
}

template <typename F>
auto Guarded(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    Malformed(std::string("malformed document: ") + e.what());
  }
}

std::string Format(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::string WriteGraph(const GraphFile& file) {
  const MeasurementGraph& g = file.graph;
  json edges = json::array();
  for (const Edge& e : g.edges()) {
    edges.push_back(json{{"i", e.i + 1}, {"j", e.j + 1}, {"w", e.w}, {"g", ElementJson(e.g)}});
  }
  json out{{"group", GroupJson(g.group())}, {"n", g.n()}, {"edges", std::move(edges)}};
  if (file.meta) out["meta"] = MetaJson(*file.meta);
  return out.dump(1) + "\n";
}

std::string WriteTruth(const TruthFile& file) {
  json out{{"group", GroupJson(file.group)},
           {"n", static_cast<int>(file.elements.size())},
           {"elements", ElementsJson(file.elements)}};
  return out.dump(1) + "\n";
}

std::string WriteSolution(const SolutionFile& file) {
  const SyncSolution& s = file.solution;
  const SyncDiagnostics& d = s.diagnostics;
  json diag{{"solver", d.solver},
            {"residual", d.residual},
            {"runtime_ms", d.runtime_ms},
            {"eigengap", d.eigengap ? json(*d.eigengap) : json(nullptr)},
            {"align_evaluations", d.align_evaluations},
            {"align_norm", d.align_norm}};
  json out{{"method", file.method},
           {"group", GroupJson(s.group)},
           {"n", static_cast<int>(s.estimates.size())},
           {"elements", ElementsJson(s.estimates)},
           {"lambda_used", s.lambda_used ? json(*s.lambda_used) : json(nullptr)},
           {"diagnostics", std::move(diag)}};
  if (file.meta) out["meta"] = MetaJson(*file.meta);
  return out.dump(1) + "\n";
}

GraphFile ParseGraph(const std::string& text) {
  const json j = Parse(text);
  return Guarded([&] {
    const GroupSpec group = ParseGroup(Field(j, "group"));
    const int n = IntField(j, "n");
    const json& edges = Field(j, "edges");
    if (!edges.is_array()) Malformed("edges must be an array");
    std::vector<Edge> out;
    out.reserve(edges.size());
    for (const json& e : edges) {
      const int i = IntField(e, "i");
      const int k = IntField(e, "j");
      const double w = e.contains("w") ? Number(e.at("w"), "w") : 1.0;
      out.push_back({i - 1, k - 1, w, ParseElement(Field(e, "g"), group)});
    }
    GraphFile file{MeasurementGraph(group, n, std::move(out)), std::nullopt};
    if (j.contains("meta")) file.meta = ParseMeta(j.at("meta"));
    return file;
  });
}

TruthFile ParseTruth(const std::string& text) {
  const json j = Parse(text);
  return Guarded([&] {
    const GroupSpec group = ParseGroup(Field(j, "group"));
    const int n = IntField(j, "n");
    return TruthFile{group, ParseElements(Field(j, "elements"), group, n)};
  });
}

SolutionFile ParseSolution(const std::string& text) {
  const json j = Parse(text);
  return Guarded([&] {
    SolutionFile file;
    file.method = Field(j, "method").get<std::string>();
    SyncSolution& s = file.solution;
    s.group = ParseGroup(Field(j, "group"));
    const int n = IntField(j, "n");
    s.estimates = ParseElements(Field(j, "elements"), s.group, n);
    if (j.contains("lambda_used") && !j.at("lambda_used").is_null()) {
      s.lambda_used = Number(j.at("lambda_used"), "lambda_used");
    }
    if (j.contains("diagnostics")) {
      const json& d = j.at("diagnostics");
      s.diagnostics.solver = d.value("solver", std::string());
      s.diagnostics.residual = NumberOr(d, "residual", 0.0);
      s.diagnostics.runtime_ms = NumberOr(d, "runtime_ms", 0.0);
      if (d.contains("eigengap") && !d.at("eigengap").is_null()) {
        s.diagnostics.eigengap = Number(d.at("eigengap"), "eigengap");
      }
      s.diagnostics.align_evaluations = d.value("align_evaluations", 0);
      s.diagnostics.align_norm = NumberOr(d, "align_norm", 0.0);
    }
    if (j.contains("meta")) file.meta = ParseMeta(j.at("meta"));
    return file;
  });
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIOError, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::kIOError, "cannot read '" + path.string() + "'");
  return ss.str();
}

void WriteFileAtomic(const std::filesystem::path& path, const std::string& contents) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIOError, "cannot write '" + tmp.string() + "'");
    out << contents;
    if (!out.flush()) throw Error(ErrorCode::kIOError, "short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::kIOError, "cannot move into '" + path.string() + "': " + ec.message());
}

std::string CsvRow(const TrialRecord& r) {
  std::ostringstream ss;
  ss << r.method << ',' << GroupKindName(r.group.kind) << ',' << r.n << ',' << r.group.d << ',' << r.group.l << ','
     << Format(r.p) << ',' << Format(r.snr_db) << ',' << Format(r.outlier_rate) << ','
     << (r.lambda > 0.0 ? Format(r.lambda) : std::string()) << ',' << r.trial << ',' << r.seed << ','
     << (r.error.empty() ? Format(r.mse) : std::string()) << ',';
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", r.runtime_ms);
  ss << buf << ',' << r.error;
  return ss.str();
}

void AppendCsv(const std::filesystem::path& path, const std::vector<std::string>& rows) {
  std::error_code ec;
  const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::string chunk;
  if (fresh) chunk += std::string(kCsvHeader) + "\n";
  for (const std::string& row : rows) chunk += row + "\n";
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw Error(ErrorCode::kIOError, "cannot append to '" + path.string() + "'");
  out << chunk;
  if (!out.flush()) throw Error(ErrorCode::kIOError, "short write to '" + path.string() + "'");
}

}  // namespace cartan_sync::cli
