#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "topocf/core.hpp"
#include "topocf/embedding.hpp"
#include "topocf/metrics.hpp"
#include "topocf/planner.hpp"
#include "topocf/segmenter.hpp"
#include "topocf/synthetic_codec.hpp"
#include "topocf/topology.hpp"

namespace topocf::io {

/// "%.9g" rendering. The CSV readers parse at float32 precision, so any
/// float-representable value round-trips exactly.
std::string fmt9(double v);

std::string read_file(const std::string& path);
/// Writes to a sibling temporary file, then renames over `path`.
/// Creates missing parent directories. Throws Error(io).
void write_file_atomic(const std::string& path, const std::string& bytes);
void make_dirs(const std::string& path);

// -- PGM (binary P5, maxval <= 255) -----------------------------------------

/// Pixel = round(value * 255).
std::string encode_pgm(const Image& img);
/// Mask pixels are written as 0 / 255.
std::string encode_pgm(const Mask& m);
Image decode_pgm(const std::string& bytes, const std::string& source = "<pgm>");
void write_pgm(const std::string& path, const Image& img);
void write_pgm(const std::string& path, const Mask& m);
Image read_pgm(const std::string& path);
/// Any nonzero pixel is foreground.
Mask read_mask_pgm(const std::string& path);

// -- CSV ---------------------------------------------------------------------

/// Header `id,label,cs_0..cs_7,is_0..is_{k-1}`, values with 9 significant digits.
std::string format_codes_csv(const Dataset& d);
Dataset parse_codes_csv(const std::string& text, const std::string& source = "<codes.csv>");
void write_codes_csv(const std::string& path, const Dataset& d);
Dataset read_codes_csv(const std::string& path);

/// Header `id,x,y`.
std::string format_embedding_csv(const Dataset& d, const Embedding2D& emb);
/// Returns coordinates in file order; `ids` receives the id column.
Embedding2D parse_embedding_csv(const std::string& text, std::vector<std::string>* ids,
                                const std::string& source = "<embedding.csv>");
/// Reads an embedding and aligns it with the records of `d` by id.
Embedding2D read_embedding_csv(const std::string& path, const Dataset& d);

// -- NDV1 binary tensor --------------------------------------------------------
//
// 16-byte little-endian header: "NDV1", u8 dtype (1 = f32, 2 = f64, 3 = u8),
// u8 rank (1 or 2), u16 reserved = 0, u32 dim0, u32 dim1 (1 when rank 1),
// followed by the row-major payload.

enum class DType : std::uint8_t { f32 = 1, f64 = 2, u8 = 3 };

struct Tensor {
  DType dtype = DType::f64;
  std::vector<std::uint32_t> dims;
  std::vector<double> values;  ///< widened to double in memory
};

std::string encode_ndv1(const Tensor& t);
Tensor decode_ndv1(const std::string& bytes, const std::string& source = "<ndv1>");
/// n x (8 + k) float64 matrix of CS then IS codes.
Tensor codes_tensor(const Dataset& d);
/// n x 2 float64 matrix.
Tensor embedding_tensor(const Embedding2D& emb);

// -- JSON --------------------------------------------------------------------

nlohmann::ordered_json graph_to_json(const TopologyGraph& g);
/// `d` resolves member ids to record indices; pass nullptr to skip that.
TopologyGraph graph_from_json(const nlohmann::json& j, const Dataset* d);
TopologyGraph read_graph_json(const std::string& path, const Dataset* d);

nlohmann::ordered_json plan_to_json(const PathPlan& p);
PathPlan plan_from_json(const nlohmann::json& j);

nlohmann::ordered_json result_to_json(const SegmentationResult& r);
nlohmann::ordered_json report_to_json(const MetricsReport& r);
std::string format_report_csv(const MetricsReport& r);

nlohmann::ordered_json registry_to_json(const SyntheticRegistry& reg);
/// Rebuilds the registry by re-rendering every entry.
std::shared_ptr<SyntheticRegistry> registry_from_json(const nlohmann::json& j);

/// Parses JSON text; syntax errors become ParseError with line and column.
nlohmann::json parse_json(const std::string& text, const std::string& source);
nlohmann::json read_json(const std::string& path);
/// Two-space indented dump with a trailing newline.
std::string dump(const nlohmann::ordered_json& j);

/// Attaches images/<id>.pgm and masks/<id>.pgm found under `dir`.
void attach_images(Dataset& d, const std::string& image_dir, const std::string& mask_dir);

}  // namespace topocf::io
