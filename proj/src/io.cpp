#include "topocf/io.hpp"

#include <unistd.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "topocf/error.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace topocf::io {

std::string fmt9(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void make_dirs(const std::string& path) {
  if (path.empty()) return;
  std::error_code ec;
  fs::create_directories(path, ec);
  if (ec) throw Error(ErrorKind::io, "cannot create directory '" + path + "': " + ec.message());
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  const fs::path target(path);
  if (target.has_parent_path()) make_dirs(target.parent_path().string());
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot open '" + tmp + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw Error(ErrorKind::io, "write to '" + tmp + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::io, "cannot move '" + tmp + "' to '" + path + "'");
  }
}

// ---------------------------------------------------------------------------
// PGM

namespace {

std::string pgm_header(int h, int w) {
  return "P5\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
}

}  // namespace

std::string encode_pgm(const Image& img) {
  std::string out = pgm_header(img.height, img.width);
  out.reserve(out.size() + img.size());
  for (float v : img.data)
    out.push_back(static_cast<char>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)));
  return out;
}

std::string encode_pgm(const Mask& m) {
  std::string out = pgm_header(m.height, m.width);
  for (auto v : m.data) out.push_back(static_cast<char>(v ? 255 : 0));
  return out;
}

Image decode_pgm(const std::string& bytes, const std::string& source) {
  std::size_t pos = 0, line = 1, line_start = 0;
  auto fail = [&](const std::string& what) -> void {
    throw ParseError(source, line, pos - line_start + 1, what);
  };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      const char c = bytes[pos];
      if (c == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (c == '\n') {
        ++pos, ++line, line_start = pos;
      } else if (c == ' ' || c == '\t' || c == '\r') {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&]() -> long {
    skip_space();
    const std::size_t start = pos;
    while (pos < bytes.size() && bytes[pos] >= '0' && bytes[pos] <= '9') ++pos;
    if (start == pos) fail("expected an integer in PGM header");
    long v = 0;
    std::from_chars(bytes.data() + start, bytes.data() + pos, v);
    return v;
  };
  if (bytes.size() < 2 || bytes.compare(0, 2, "P5") != 0) fail("not a binary PGM (missing P5 magic)");
  pos = 2;
  const long w = number();
  const long h = number();
  const long maxval = number();
  if (w <= 0 || h <= 0) fail("non-positive PGM dimensions");
  if (maxval <= 0 || maxval > 255) fail("only 8-bit PGM (maxval 1..255) is supported");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    fail("missing whitespace after PGM header");
  ++pos;
  const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - pos < n) fail("PGM payload truncated");
  Image img(static_cast<int>(h), static_cast<int>(w));
  for (std::size_t i = 0; i < n; ++i)
    img.data[i] = static_cast<float>(static_cast<unsigned char>(bytes[pos + i])) /
                  static_cast<float>(maxval);
  return img;
}

void write_pgm(const std::string& path, const Image& img) { write_file_atomic(path, encode_pgm(img)); }
void write_pgm(const std::string& path, const Mask& m) { write_file_atomic(path, encode_pgm(m)); }
Image read_pgm(const std::string& path) { return decode_pgm(read_file(path), path); }

Mask read_mask_pgm(const std::string& path) {
  const Image img = read_pgm(path);
  Mask m(img.height, img.width);
  for (std::size_t i = 0; i < m.size(); ++i) m.data[i] = img.data[i] > 0.0f;
  return m;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

struct Field {
  std::string text;
  std::size_t column;  // 1-based
};

struct CsvRow {
  std::size_t line;
  std::vector<Field> fields;
};

std::vector<CsvRow> split_csv(const std::string& text) {
  std::vector<CsvRow> rows;
  std::size_t line = 0, pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    ++line;
    std::string_view raw(text.data() + pos, end - pos);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    if (!raw.empty()) {
      CsvRow row{line, {}};
      std::size_t start = 0;
      while (true) {
        const auto comma = raw.find(',', start);
        const auto stop = comma == std::string_view::npos ? raw.size() : comma;
        row.fields.push_back({std::string(raw.substr(start, stop - start)), start + 1});
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
      rows.push_back(std::move(row));
    }
    pos = end + 1;
  }
  return rows;
}

// Table values are float32 by construction; parsing at float precision makes
// the 9-digit text round-trip exactly.
double parse_number(const Field& f, std::size_t line, const std::string& source) {
  float v = 0.0f;
  const char* b = f.text.data();
  const char* e = b + f.text.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || !std::isfinite(v))
    throw ParseError(source, line, f.column, "expected a finite number, got '" + f.text + "'");
  return v;
}

}  // namespace

std::string format_codes_csv(const Dataset& d) {
  const std::size_t k = d.records.empty() ? 0 : d.records.front().is.size();
  std::string out = "id,label";
  for (std::size_t i = 0; i < kCsDim; ++i) out += ",cs_" + std::to_string(i);
  for (std::size_t i = 0; i < k; ++i) out += ",is_" + std::to_string(i);
  out += '\n';
  for (const auto& r : d.records) {
    out += r.id;
    out += ',';
    out += to_string(r.label);
    for (double v : r.cs) out += ',' + fmt9(v);
    for (double v : r.is) out += ',' + fmt9(v);
    out += '\n';
  }
  return out;
}

Dataset parse_codes_csv(const std::string& text, const std::string& source) {
  const auto rows = split_csv(text);
  if (rows.empty()) throw ParseError(source, 1, 1, "missing header");
  const auto& header = rows.front();
  const auto& hf = header.fields;
  auto expect = [&](std::size_t i, const std::string& name) {
    if (i >= hf.size() || hf[i].text != name)
      throw ParseError(source, header.line, i < hf.size() ? hf[i].column : 1,
                       "header column " + std::to_string(i + 1) + " must be '" + name + "'");
  };
  expect(0, "id");
  expect(1, "label");
  for (std::size_t i = 0; i < kCsDim; ++i) expect(2 + i, "cs_" + std::to_string(i));
  const std::size_t k = hf.size() - 2 - kCsDim;
  for (std::size_t i = 0; i < k; ++i) expect(2 + kCsDim + i, "is_" + std::to_string(i));

  Dataset d;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != hf.size())
      throw ParseError(source, row.line, 1,
                       "expected " + std::to_string(hf.size()) + " fields, got " +
                           std::to_string(row.fields.size()));
    SampleRecord rec;
    rec.id = row.fields[0].text;
    if (rec.id.empty()) throw ParseError(source, row.line, 1, "empty id");
    const auto label = parse_label(row.fields[1].text);
    if (!label)
      throw ParseError(source, row.line, row.fields[1].column,
                       "label must be normal or abnormal, got '" + row.fields[1].text + "'");
    rec.label = *label;
    for (std::size_t i = 0; i < kCsDim; ++i) rec.cs[i] = parse_number(row.fields[2 + i], row.line, source);
    rec.is.resize(k);
    for (std::size_t i = 0; i < k; ++i)
      rec.is[i] = parse_number(row.fields[2 + kCsDim + i], row.line, source);
    d.records.push_back(std::move(rec));
  }
  return d;
}

void write_codes_csv(const std::string& path, const Dataset& d) {
  write_file_atomic(path, format_codes_csv(d));
}

Dataset read_codes_csv(const std::string& path) { return parse_codes_csv(read_file(path), path); }

std::string format_embedding_csv(const Dataset& d, const Embedding2D& emb) {
  if (emb.size() != d.records.size())
    throw Error(ErrorKind::contract, "embedding and dataset sizes differ");
  std::string out = "id,x,y\n";
  for (std::size_t i = 0; i < emb.size(); ++i)
    out += d.records[i].id + ',' + fmt9(emb[i][0]) + ',' + fmt9(emb[i][1]) + '\n';
  return out;
}

Embedding2D parse_embedding_csv(const std::string& text, std::vector<std::string>* ids,
                                const std::string& source) {
  const auto rows = split_csv(text);
  if (rows.empty()) throw ParseError(source, 1, 1, "missing header");
  const auto& hf = rows.front().fields;
  if (hf.size() != 3 || hf[0].text != "id" || hf[1].text != "x" || hf[2].text != "y")
    throw ParseError(source, rows.front().line, 1, "header must be 'id,x,y'");
  Embedding2D emb;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.fields.size() != 3)
      throw ParseError(source, row.line, 1, "expected 3 fields, got " + std::to_string(row.fields.size()));
    emb.push_back({parse_number(row.fields[1], row.line, source),
                   parse_number(row.fields[2], row.line, source)});
    if (ids) ids->push_back(row.fields[0].text);
  }
  return emb;
}

Embedding2D read_embedding_csv(const std::string& path, const Dataset& d) {
  std::vector<std::string> ids;
  const auto raw = parse_embedding_csv(read_file(path), &ids, path);
  std::unordered_map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < ids.size(); ++i) where.emplace(ids[i], i);
  if (ids.size() != d.records.size())
    throw Error(ErrorKind::contract, "embedding '" + path + "' has " + std::to_string(ids.size()) +
                                         " rows for " + std::to_string(d.records.size()) + " records");
  Embedding2D out(d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    auto it = where.find(d.records[i].id);
    if (it == where.end())
      throw Error(ErrorKind::contract, "embedding has no row for '" + d.records[i].id + "'");
    out[i] = raw[it->second];
  }
  return out;
}

// ---------------------------------------------------------------------------
// NDV1

namespace {

template <class T>
void put_le(std::string& out, T v) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get_le(const std::string& in, std::size_t pos) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, in.data() + pos, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

std::size_t dtype_size(DType t) {
  switch (t) {
    case DType::f32: return 4;
    case DType::f64: return 8;
    case DType::u8: return 1;
  }
  return 0;
}

}  // namespace

std::string encode_ndv1(const Tensor& t) {
  if (t.dims.empty() || t.dims.size() > 2) throw Error(ErrorKind::contract, "NDV1 rank must be 1 or 2");
  std::size_t count = 1;
  for (auto d : t.dims) count *= d;
  if (count != t.values.size()) throw Error(ErrorKind::contract, "NDV1 dims do not match payload");
  std::string out = "NDV1";
  out.push_back(static_cast<char>(t.dtype));
  out.push_back(static_cast<char>(t.dims.size()));
  put_le<std::uint16_t>(out, 0);
  put_le<std::uint32_t>(out, t.dims[0]);
  put_le<std::uint32_t>(out, t.dims.size() == 2 ? t.dims[1] : 1u);
  for (double v : t.values) {
    switch (t.dtype) {
      case DType::f32: put_le<float>(out, static_cast<float>(v)); break;
      case DType::f64: put_le<double>(out, v); break;
      case DType::u8: out.push_back(static_cast<char>(static_cast<std::uint8_t>(v))); break;
    }
  }
  return out;
}

Tensor decode_ndv1(const std::string& bytes, const std::string& source) {
  auto fail = [&](std::size_t offset, const std::string& what) {
    throw ParseError(source, 1, offset + 1, what);
  };
  if (bytes.size() < 16) fail(0, "NDV1 header truncated");
  if (bytes.compare(0, 4, "NDV1") != 0) fail(0, "bad NDV1 magic");
  Tensor t;
  const auto code = static_cast<std::uint8_t>(bytes[4]);
  if (code < 1 || code > 3) fail(4, "unknown NDV1 dtype " + std::to_string(code));
  t.dtype = static_cast<DType>(code);
  const auto rank = static_cast<std::uint8_t>(bytes[5]);
  if (rank < 1 || rank > 2) fail(5, "NDV1 rank must be 1 or 2");
  if (get_le<std::uint16_t>(bytes, 6) != 0) fail(6, "NDV1 reserved field must be 0");
  t.dims.push_back(get_le<std::uint32_t>(bytes, 8));
  const auto d1 = get_le<std::uint32_t>(bytes, 12);
  if (rank == 2) t.dims.push_back(d1);
  else if (d1 != 1) fail(12, "rank-1 NDV1 must store dim1 = 1");
  std::size_t count = 1;
  for (auto d : t.dims) count *= d;
  const std::size_t width = dtype_size(t.dtype);
  if (bytes.size() != 16 + count * width) fail(16, "NDV1 payload size does not match header");
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t at = 16 + i * width;
    switch (t.dtype) {
      case DType::f32: t.values[i] = get_le<float>(bytes, at); break;
      case DType::f64: t.values[i] = get_le<double>(bytes, at); break;
      case DType::u8: t.values[i] = static_cast<std::uint8_t>(bytes[at]); break;
    }
  }
  return t;
}

Tensor codes_tensor(const Dataset& d) {
  const std::size_t k = d.records.empty() ? 0 : d.records.front().is.size();
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(d.records.size()), static_cast<std::uint32_t>(kCsDim + k)};
  for (const auto& r : d.records) {
    t.values.insert(t.values.end(), r.cs.begin(), r.cs.end());
    t.values.insert(t.values.end(), r.is.begin(), r.is.end());
  }
  return t;
}

Tensor embedding_tensor(const Embedding2D& emb) {
  Tensor t;
  t.dims = {static_cast<std::uint32_t>(emb.size()), 2u};
  for (const auto& p : emb) t.values.insert(t.values.end(), p.begin(), p.end());
  return t;
}

// ---------------------------------------------------------------------------
// JSON

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t upto = std::min<std::size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    for (std::size_t i = 0; i < upto; ++i) {
      if (text[i] == '\n') ++line, col = 1;
      else ++col;
    }
    throw ParseError(source, line, col, "invalid JSON");
  }
}

json read_json(const std::string& path) { return parse_json(read_file(path), path); }

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

namespace {

[[noreturn]] void schema_error(const std::string& what) {
  throw Error(ErrorKind::parse, "JSON schema: " + what);
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) schema_error(std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) schema_error(std::string(what) + " must be a number");
  return j.get<double>();
}

}  // namespace

ordered_json graph_to_json(const TopologyGraph& g) {
  ordered_json nodes = ordered_json::array();
  for (const auto& n : g.nodes) {
    ordered_json center = ordered_json::array();
    for (double v : n.center) center.push_back(v);
    nodes.push_back({{"id", n.id},
                     {"members", n.member_ids},
                     {"center", center},
                     {"abnormal_ratio", n.abnormal_ratio},
                     {"centroid2d", {n.centroid2d[0], n.centroid2d[1]}},
                     {"bin", n.bin},
                     {"cluster", n.cluster}});
  }
  ordered_json edges = ordered_json::array();
  for (const auto& e : g.edges) edges.push_back({{"a", e.a}, {"b", e.b}, {"weight", e.weight}});
  return {{"nodes", nodes}, {"edges", edges}};
}

TopologyGraph graph_from_json(const json& j, const Dataset* d) {
  std::unordered_map<std::string, std::size_t> index;
  if (d)
    for (std::size_t i = 0; i < d->records.size(); ++i) index.emplace(d->records[i].id, i);

  TopologyGraph g;
  const auto& nodes = field(j, "nodes");
  if (!nodes.is_array()) schema_error("'nodes' must be an array");
  for (const auto& jn : nodes) {
    TopologyNode n;
    n.id = field(jn, "id").get<int>();
    if (n.id != static_cast<int>(g.nodes.size())) schema_error("node ids must be 0..n-1 in order");
    for (const auto& m : field(jn, "members")) {
      if (!m.is_string()) schema_error("member ids must be strings");
      n.member_ids.push_back(m.get<std::string>());
      if (d) {
        auto it = index.find(n.member_ids.back());
        if (it == index.end())
          throw Error(ErrorKind::contract, "graph member '" + n.member_ids.back() + "' not in dataset");
        n.members.push_back(it->second);
      }
    }
    std::sort(n.members.begin(), n.members.end());
    const auto& c = field(jn, "center");
    if (!c.is_array() || c.size() != kCsDim) schema_error("node center must have 8 values");
    for (std::size_t k = 0; k < kCsDim; ++k) n.center[k] = number(c[k], "center value");
    n.abnormal_ratio = number(field(jn, "abnormal_ratio"), "abnormal_ratio");
    const auto& cc = field(jn, "centroid2d");
    if (!cc.is_array() || cc.size() != 2) schema_error("centroid2d must have 2 values");
    n.centroid2d = {number(cc[0], "centroid2d"), number(cc[1], "centroid2d")};
    if (jn.contains("bin")) n.bin = jn.at("bin").get<int>();
    if (jn.contains("cluster")) n.cluster = jn.at("cluster").get<int>();
    g.nodes.push_back(std::move(n));
  }
  for (const auto& je : field(j, "edges")) {
    TopologyEdge e{field(je, "a").get<int>(), field(je, "b").get<int>(), number(field(je, "weight"), "weight")};
    const int n = static_cast<int>(g.nodes.size());
    if (e.a < 0 || e.b < 0 || e.a >= n || e.b >= n || e.a == e.b) schema_error("edge endpoints invalid");
    g.edges.push_back(e);
  }
  return g;
}

TopologyGraph read_graph_json(const std::string& path, const Dataset* d) {
  try {
    return graph_from_json(read_json(path), d);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, path + ": " + e.what());
  }
}

ordered_json plan_to_json(const PathPlan& p) {
  return {{"node_ids", p.node_ids}, {"cumulative_lengths", p.cumulative_lengths}};
}

PathPlan plan_from_json(const json& j) {
  PathPlan p;
  p.node_ids = field(j, "node_ids").get<std::vector<int>>();
  p.cumulative_lengths = field(j, "cumulative_lengths").get<std::vector<double>>();
  if (p.node_ids.empty() || p.node_ids.size() != p.cumulative_lengths.size())
    schema_error("plan node_ids and cumulative_lengths must be non-empty and aligned");
  return p;
}

ordered_json result_to_json(const SegmentationResult& r) {
  ordered_json j;
  j["id"] = r.id;
  j["mode"] = to_string(r.mode);
  j["ok"] = r.ok();
  if (!r.ok()) {
    j["error"] = r.error;
    return j;
  }
  if (r.plan) j["plan"] = plan_to_json(*r.plan);
  if (r.reference_id) {
    j["reference_id"] = *r.reference_id;
    j["reference_distance"] = r.reference_distance;
  }
  ordered_json steps = ordered_json::array();
  for (const auto& s : r.trace.steps) {
    ordered_json st;
    st["t"] = s.t;
    if (s.node_id >= 0) st["node_id"] = s.node_id;
    st["p_abnormal"] = s.p_abnormal;
    st["cs"] = s.cs;
    steps.push_back(std::move(st));
  }
  j["steps"] = steps;
  j["flip_index"] = r.trace.flip_index ? ordered_json(*r.trace.flip_index) : ordered_json(nullptr);
  j["no_flip"] = r.trace.no_flip;
  j["mask_area"] = mask_area(r.mask);
  return j;
}

ordered_json report_to_json(const MetricsReport& r) {
  ordered_json per = ordered_json::array();
  for (const auto& s : r.per_sample) per.push_back({{"id", s.id}, {"iou", s.iou}, {"dice", s.dice}});
  return {{"n", r.n}, {"mean_iou", r.mean_iou}, {"mean_dice", r.mean_dice}, {"per_sample", per}};
}

std::string format_report_csv(const MetricsReport& r) {
  std::string out = "id,iou,dice\n";
  for (const auto& s : r.per_sample) out += s.id + ',' + fmt9(s.iou) + ',' + fmt9(s.dice) + '\n';
  return out;
}

ordered_json registry_to_json(const SyntheticRegistry& reg) {
  ordered_json entries = ordered_json::array();
  for (const auto& e : reg.entries())
    entries.push_back({{"id", e.id}, {"cs", e.codes.cs}, {"is", e.codes.is}});
  return {{"height", reg.height()}, {"width", reg.width()}, {"entries", entries}};
}

std::shared_ptr<SyntheticRegistry> registry_from_json(const json& j) {
  auto reg = std::make_shared<SyntheticRegistry>();
  const int h = field(j, "height").get<int>();
  const int w = field(j, "width").get<int>();
  reg->set_shape(h, w);
  for (const auto& je : field(j, "entries")) {
    Codes c;
    const auto cs = field(je, "cs").get<std::vector<double>>();
    if (cs.size() != kCsDim) schema_error("registry cs must have 8 values");
    std::copy(cs.begin(), cs.end(), c.cs.begin());
    c.is = field(je, "is").get<std::vector<double>>();
    reg->add(field(je, "id").get<std::string>(), c, phantom::render(c.cs, c.is, h, w));
  }
  return reg;
}

void attach_images(Dataset& d, const std::string& image_dir, const std::string& mask_dir) {
  for (auto& r : d.records) {
    if (!image_dir.empty()) {
      const auto p = (fs::path(image_dir) / (r.id + ".pgm")).string();
      if (fs::exists(p)) r.image = read_pgm(p);
    }
    if (!mask_dir.empty()) {
      const auto p = (fs::path(mask_dir) / (r.id + ".pgm")).string();
      if (fs::exists(p)) r.gt_mask = read_mask_pgm(p);
    }
  }
}

}  // namespace topocf::io
