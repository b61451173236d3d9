#include "topocf/core.hpp"

#include <cmath>
#include <unordered_map>

#include "topocf/error.hpp"

namespace topocf {

const char* to_string(ClassLabel label) {
  return label == ClassLabel::abnormal ? "abnormal" : "normal";
}

std::optional<ClassLabel> parse_label(const std::string& text) {
  if (text == "normal") return ClassLabel::normal;
  if (text == "abnormal") return ClassLabel::abnormal;
  return std::nullopt;
}

std::size_t ValidationReport::count(const std::string& kind) const {
  std::size_t n = 0;
  for (const auto& f : findings) n += f.kind == kind;
  return n;
}

namespace {

bool all_finite(const auto& values) {
  for (double v : values)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

ValidationReport validate_dataset(const Dataset& d) {
  ValidationReport report;
  auto add = [&](std::string kind, std::string detail) {
    report.findings.push_back({std::move(kind), std::move(detail)});
  };

  if (d.records.empty()) add("empty", "dataset has no records");

  std::unordered_map<std::string, std::size_t> seen;
  const std::size_t is_dim = d.records.empty() ? 0 : d.records.front().is.size();
  std::optional<std::pair<int, int>> shape;

  for (std::size_t i = 0; i < d.records.size(); ++i) {
    const auto& r = d.records[i];
    auto [it, fresh] = seen.emplace(r.id, i);
    if (!fresh) add("duplicate-id", "id '" + r.id + "' at rows " + std::to_string(it->second) +
                                        " and " + std::to_string(i));
    if (r.id.empty()) add("empty-id", "row " + std::to_string(i));
    if (r.is.size() != is_dim)
      add("dimension-mismatch", "'" + r.id + "' has IS dimension " + std::to_string(r.is.size()) +
                                    ", expected " + std::to_string(is_dim));
    if (!all_finite(r.cs) || !all_finite(r.is)) add("non-finite-code", "'" + r.id + "'");

    if (r.image) {
      const Image& img = *r.image;
      if (img.height < 8 || img.width < 8 ||
          img.data.size() != static_cast<std::size_t>(img.height) * img.width) {
        add("image-shape", "'" + r.id + "'");
      } else {
        if (!shape) shape = {img.height, img.width};
        if (*shape != std::pair{img.height, img.width})
          add("dimension-mismatch", "'" + r.id + "' image shape differs from first image");
      }
      std::size_t bad = 0;
      for (float v : img.data) bad += !(v >= 0.0f && v <= 1.0f);
      if (bad) add("pixel-range", "'" + r.id + "' has " + std::to_string(bad) +
                                      " pixels outside [0,1]");
    }
    if (r.gt_mask) {
      const Mask& m = *r.gt_mask;
      if (r.image && (m.height != r.image->height || m.width != r.image->width))
        add("dimension-mismatch", "'" + r.id + "' mask shape differs from its image");
      std::size_t bad = 0;
      for (auto v : m.data) bad += v > 1;
      if (bad) add("mask-values", "'" + r.id + "' mask is not binary");
    }
  }
  report.valid = report.findings.empty();
  return report;
}

DatasetStats dataset_stats(const Dataset& d) {
  const auto report = validate_dataset(d);
  if (!report.valid)
    throw Error(ErrorKind::contract, "invalid dataset: " + report.findings.front().kind + " (" +
                                         report.findings.front().detail + ")");
  DatasetStats s;
  s.is_dim = d.records.front().is.size();
  for (const auto& r : d.records) {
    (r.label == ClassLabel::abnormal ? s.n_abnormal : s.n_normal) += 1;
    if (r.image && !s.image_shape) s.image_shape = {r.image->height, r.image->width};
  }
  return s;
}

void check_image(const Image& img, const char* what) {
  if (img.height < 8 || img.width < 8)
    throw Error(ErrorKind::contract, std::string(what) + ": shape " + std::to_string(img.height) +
                                         "x" + std::to_string(img.width) + " below 8x8");
  if (img.data.size() != static_cast<std::size_t>(img.height) * img.width)
    throw Error(ErrorKind::contract, std::string(what) + ": buffer size does not match shape");
  for (float v : img.data)
    if (!(v >= 0.0f && v <= 1.0f))
      throw Error(ErrorKind::contract, std::string(what) + ": pixel outside [0,1]");
}

void check_same_shape(const Image& a, const Image& b, const char* what) {
  if (a.height != b.height || a.width != b.width)
    throw Error(ErrorKind::contract, std::string(what) + ": shape mismatch " +
                                         std::to_string(a.height) + "x" + std::to_string(a.width) +
                                         " vs " + std::to_string(b.height) + "x" +
                                         std::to_string(b.width));
}

void check_same_shape(const Mask& a, const Mask& b, const char* what) {
  if (a.height != b.height || a.width != b.width)
    throw Error(ErrorKind::contract, std::string(what) + ": shape mismatch " +
                                         std::to_string(a.height) + "x" + std::to_string(a.width) +
                                         " vs " + std::to_string(b.height) + "x" +
                                         std::to_string(b.width));
}

double euclidean(const CSCode& a, const CSCode& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < kCsDim; ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace topocf
