// topocf command-line tool: one subcommand per pipeline stage.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "CLI11.hpp"
#include "topocf/config.hpp"
#include "topocf/error.hpp"
#include "topocf/io.hpp"
#include "topocf/manifest.hpp"
#include "topocf/pipeline.hpp"
#include "topocf/plot.hpp"
#include "topocf/scenarios.hpp"
#include "topocf/subprocess_codec.hpp"
#include "topocf/synthetic_codec.hpp"

namespace fs = std::filesystem;
using namespace topocf;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config_path, "INI configuration file")->check(CLI::ExistingFile);
  sub->add_option("--seed", c.seed, "overrides the configured seed (default 0)");
  sub->add_option("-o,--out", c.out_dir, "output directory (default $TOPOCF_OUT_DIR or .)");
}

struct Context {
  PipelineConfig cfg;
  std::string out;
  std::unique_ptr<RunManifest> manifest;
  StageTimer clock;

  std::string path(const std::string& name) const { return (fs::path(out) / name).string(); }

  void write(const std::string& name, const std::string& bytes) {
    io::write_file_atomic(path(name), bytes);
    manifest->add_output(name);
  }

  void close() {
    manifest->set_timing("total", clock.ms());
    io::write_file_atomic(path("manifest.json"), io::dump(manifest->to_json()));
  }
};

Context open_context(const std::string& command, const Common& c) {
  Context ctx;
  if (!c.config_path.empty()) ctx.cfg = load_config(c.config_path);
  ctx.cfg.apply_seed(c.seed ? *c.seed : ctx.cfg.seed);
  validate_config(ctx.cfg);
  ctx.out = c.out_dir;
  if (ctx.out.empty()) {
    const char* env = std::getenv("TOPOCF_OUT_DIR");
    ctx.out = env && *env ? env : ".";
  }
  io::make_dirs(ctx.out);
  ctx.manifest = std::make_unique<RunManifest>(command, ctx.cfg.seed, config_to_json(ctx.cfg));
  if (!c.config_path.empty()) ctx.manifest->add_input("config", c.config_path);
  return ctx;
}

Dataset load_codes(Context& ctx, const std::string& path) {
  Dataset d = io::read_codes_csv(path);
  ctx.manifest->add_input("codes", path);
  const auto report = validate_dataset(d);
  if (!report.valid) {
    std::string msg = path + ": invalid dataset";
    for (const auto& f : report.findings) msg += "; " + f.kind + ": " + f.detail;
    throw Error(ErrorKind::contract, msg);
  }
  return d;
}

std::unique_ptr<Codec> make_codec(const PipelineConfig& cfg, int height, int width) {
  if (cfg.codec.kind == CodecKind::subprocess) {
    SubprocessCodecOptions o;
    o.command = cfg.codec.command;
    o.timeout_s = cfg.codec.timeout_s;
    o.is_dim = static_cast<std::size_t>(cfg.codec.is_dim);
    o.height = height;
    o.width = width;
    return std::make_unique<SubprocessCodec>(o);
  }
  return std::make_unique<SyntheticCodec>(height, width);
}

// -- synth -------------------------------------------------------------------

struct SynthArgs {
  Common common;
  std::size_t normal = 0;
  std::size_t abnormal = 0;
  std::string scenario = "standard";
  std::optional<int> size;
};

void cmd_synth(const SynthArgs& a) {
  auto ctx = open_context("synth", a.common);
  const int size = a.size ? *a.size : ctx.cfg.codec.image_size;
  if (size < 8) throw Error(ErrorKind::contract, "--size must be at least 8");
  StageTimer t;
  const SyntheticData data = a.scenario == "arc" ? make_arc_dataset(a.normal, a.abnormal, ctx.cfg.seed, size)
                                                 : make_dataset(a.normal, a.abnormal, ctx.cfg.seed, size);
  ctx.manifest->set_timing("generate", t.ms());
  for (std::size_t i = 0; i < data.dataset.records.size(); ++i) {
    const auto& r = data.dataset.records[i];
    ctx.write("images/" + r.id + ".pgm", io::encode_pgm(*r.image));
    ctx.write("masks/" + r.id + ".pgm", io::encode_pgm(data.masks[i]));
  }
  ctx.write("codes.csv", io::format_codes_csv(data.dataset));
  ctx.write("codes.ndv1", io::encode_ndv1(io::codes_tensor(data.dataset)));
  ctx.write("registry.json", io::dump(io::registry_to_json(*data.registry)));
  ctx.manifest->set_extra("scenario", a.scenario);
  ctx.manifest->set_extra("records", data.dataset.records.size());
  ctx.close();
}

// -- embed -------------------------------------------------------------------

struct EmbedArgs {
  Common common;
  std::string codes;
};

void cmd_embed(const EmbedArgs& a) {
  auto ctx = open_context("embed", a.common);
  const Dataset d = load_codes(ctx, a.codes);
  StageTimer t;
  const auto res = tsne_fit(cs_points(d), ctx.cfg.embedding);
  ctx.manifest->set_timing("tsne", t.ms());
  ctx.write("embedding.csv", io::format_embedding_csv(d, res.embedding));
  ctx.write("embedding.ndv1", io::encode_ndv1(io::embedding_tensor(res.embedding)));
  ctx.manifest->set_extra("perplexity_used", res.perplexity_used);
  ctx.manifest->set_extra("kl_initial", res.kl_initial);
  ctx.manifest->set_extra("kl_final", res.kl_final);
  ctx.close();
}

// -- topology ----------------------------------------------------------------

struct TopologyArgs {
  Common common;
  std::string codes;
  std::string embedding;
};

void cmd_topology(const TopologyArgs& a) {
  auto ctx = open_context("topology", a.common);
  const Dataset d = load_codes(ctx, a.codes);
  const auto emb = io::read_embedding_csv(a.embedding, d);
  ctx.manifest->add_input("embedding", a.embedding);
  StageTimer t;
  const auto g = build_mapper(d, emb, ctx.cfg.mapper);
  ctx.manifest->set_timing("mapper", t.ms());
  ctx.write("graph.json", io::dump(io::graph_to_json(g)));
  ctx.manifest->set_extra("nodes", g.nodes.size());
  ctx.manifest->set_extra("edges", g.edges.size());
  ctx.close();
}

// -- plan --------------------------------------------------------------------

struct PlanArgs {
  Common common;
  std::string codes;
  std::string graph;
  std::vector<std::string> ids;
};

void cmd_plan(const PlanArgs& a) {
  auto ctx = open_context("plan", a.common);
  const Dataset d = load_codes(ctx, a.codes);
  const auto g = io::read_graph_json(a.graph, &d);
  ctx.manifest->add_input("graph", a.graph);
  const std::set<std::string> wanted(a.ids.begin(), a.ids.end());
  std::set<std::string> seen;
  const auto m = adjacency_matrix(g);
  nlohmann::ordered_json plans = nlohmann::ordered_json::array();
  StageTimer t;
  std::uint64_t k = 0;
  for (const auto& r : d.records) {
    if (r.label != ClassLabel::abnormal) continue;
    const std::uint64_t seed = record_seed(ctx.cfg.planner.seed, k++);
    if (!wanted.empty() && !wanted.count(r.id)) continue;
    seen.insert(r.id);
    PlannerConfig pc = ctx.cfg.planner;
    pc.seed = seed;
    PathPlan plan;
    try {
      plan = plan_for(r.cs, r.label, g, m, pc);
    } catch (const Error& e) {
      throw Error(e.kind(), r.id + ": " + e.what());
    }
    auto j = io::plan_to_json(plan);
    nlohmann::ordered_json entry;
    entry["id"] = r.id;
    for (const auto& [key, v] : j.items()) entry[key] = v;
    plans.push_back(std::move(entry));
  }
  for (const auto& id : wanted)
    if (!seen.count(id)) throw Error(ErrorKind::contract, "'" + id + "' is not an abnormal record");
  ctx.manifest->set_timing("plan", t.ms());
  ctx.write("plans.json", io::dump({{"plans", plans}}));
  ctx.close();
}

// -- segment -----------------------------------------------------------------

struct SegmentArgs {
  Common common;
  std::string codes;
  std::string graph;
  std::string images;
  std::string plans;
  std::string mode;
};

void cmd_segment(const SegmentArgs& a) {
  auto ctx = open_context("segment", a.common);
  if (!a.mode.empty()) {
    const auto m = parse_walk_mode(a.mode);
    if (!m) throw Error(ErrorKind::contract, "unknown --mode '" + a.mode + "'");
    ctx.cfg.walk.mode = *m;
  }
  Dataset d = load_codes(ctx, a.codes);
  std::string image_dir = a.images;
  if (image_dir.empty()) {
    const auto guess = fs::path(a.codes).parent_path() / "images";
    if (fs::is_directory(guess)) image_dir = guess.string();
  }
  if (!image_dir.empty()) {
    if (!fs::is_directory(image_dir)) throw Error(ErrorKind::io, "no image directory '" + image_dir + "'");
    io::attach_images(d, image_dir, "");
  }
  const bool from_files = !image_dir.empty();

  int h = ctx.cfg.codec.image_size, w = ctx.cfg.codec.image_size;
  for (const auto& r : d.records)
    if (r.image) {
      h = r.image->height, w = r.image->width;
      break;
    }
  const auto codec = make_codec(ctx.cfg, h, w);
  const auto cfg = ctx.cfg.segment_config(from_files);

  const bool graph_mode = ctx.cfg.walk.mode == WalkMode::graph_path;
  TopologyGraph g;
  if (graph_mode || !a.graph.empty()) {
    if (a.graph.empty()) throw Error(ErrorKind::contract, "graph mode needs --graph");
    g = io::read_graph_json(a.graph, &d);
    ctx.manifest->add_input("graph", a.graph);
  }

  StageTimer t;
  std::vector<SegmentationResult> results;
  if (graph_mode && !a.plans.empty()) {
    const auto j = io::read_json(a.plans);
    ctx.manifest->add_input("plans", a.plans);
    std::unordered_map<std::string, PathPlan> by_id;
    for (const auto& p : j.at("plans")) by_id.emplace(p.at("id").get<std::string>(), io::plan_from_json(p));
    for (const auto& r : d.records) {
      if (r.label != ClassLabel::abnormal) continue;
      auto it = by_id.find(r.id);
      if (it == by_id.end()) throw Error(ErrorKind::contract, "no plan for '" + r.id + "'");
      try {
        results.push_back(segment_with_plan(r, it->second, g, *codec, cfg));
      } catch (const BridgeError&) {
        throw;
      } catch (const Error& e) {
        SegmentationResult failed;
        failed.id = r.id;
        failed.error = std::string(to_string(e.kind())) + ": " + e.what();
        failed.heatmap = Image(h, w);
        failed.mask = Mask(h, w);
        results.push_back(std::move(failed));
      }
    }
  } else {
    results = segment_dataset(d, g, *codec, cfg);
  }
  ctx.manifest->set_timing("segment", t.ms());

  nlohmann::ordered_json traces = nlohmann::ordered_json::array();
  std::size_t failed = 0, no_flip = 0;
  for (const auto& r : results) {
    ctx.write("masks/" + r.id + ".pgm", io::encode_pgm(r.mask));
    ctx.write("heatmaps/" + r.id + ".pgm", io::encode_pgm(r.heatmap));
    traces.push_back(io::result_to_json(r));
    failed += !r.ok();
    no_flip += r.ok() && r.trace.no_flip;
  }
  ctx.write("traces.json", io::dump({{"mode", to_string(ctx.cfg.walk.mode)}, {"results", traces}}));
  ctx.manifest->set_extra("mode", to_string(ctx.cfg.walk.mode));
  ctx.manifest->set_extra("segmented", results.size());
  ctx.manifest->set_extra("failed", failed);
  ctx.manifest->set_extra("no_flip", no_flip);
  ctx.close();
  if (failed) std::fprintf(stderr, "topocf: %zu record(s) failed, see traces.json\n", failed);
}

// -- eval --------------------------------------------------------------------

struct EvalArgs {
  Common common;
  std::string pred;
  std::string gt;
};

void cmd_eval(const EvalArgs& a) {
  auto ctx = open_context("eval", a.common);
  for (const auto& dir : {a.pred, a.gt})
    if (!fs::is_directory(dir)) throw Error(ErrorKind::io, "no mask directory '" + dir + "'");
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(a.pred))
    if (e.is_regular_file() && e.path().extension() == ".pgm") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  if (names.empty()) throw Error(ErrorKind::empty_input, "no .pgm masks in '" + a.pred + "'");
  std::vector<SampleScore> scores;
  for (const auto& name : names) {
    const auto gt_path = (fs::path(a.gt) / name).string();
    if (!fs::exists(gt_path)) throw Error(ErrorKind::io, "no ground truth for '" + name + "' in " + a.gt);
    const Mask p = io::read_mask_pgm((fs::path(a.pred) / name).string());
    const Mask g = io::read_mask_pgm(gt_path);
    scores.push_back({fs::path(name).stem().string(), iou(p, g), dice(p, g)});
  }
  const auto report = mean_report(std::move(scores));
  ctx.write("report.json", io::dump(io::report_to_json(report)));
  ctx.write("report.csv", io::format_report_csv(report));
  ctx.manifest->set_extra("mean_iou", report.mean_iou);
  ctx.manifest->set_extra("mean_dice", report.mean_dice);
  ctx.close();
  std::printf("n=%zu mean_iou=%.4f mean_dice=%.4f\n", report.n, report.mean_iou, report.mean_dice);
}

// -- plot --------------------------------------------------------------------

struct PlotArgs {
  Common common;
  std::string graph;
  std::string embedding;
  std::string codes;
};

void cmd_plot(const PlotArgs& a) {
  auto ctx = open_context("plot", a.common);
  if (!fs::exists(a.graph)) throw Error(ErrorKind::io, "no graph file '" + a.graph + "'");
  const auto g = io::read_graph_json(a.graph, nullptr);
  ctx.manifest->add_input("graph", a.graph);
  ctx.write("graph.svg", graph_svg(g));
  if (!a.embedding.empty()) {
    if (a.codes.empty()) throw Error(ErrorKind::contract, "--embedding needs --codes for class colours");
    const Dataset d = load_codes(ctx, a.codes);
    ctx.manifest->add_input("embedding", a.embedding);
    ctx.write("embedding.svg", embedding_svg(d, io::read_embedding_csv(a.embedding, d)));
  }
  ctx.close();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"topocf: topology-guided counterfactual lesion segmentation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic phantom dataset");
  add_common(s, synth.common);
  s->add_option("--normal", synth.normal, "number of normal records")->required();
  s->add_option("--abnormal", synth.abnormal, "number of abnormal records")->required();
  s->add_option("--scenario", synth.scenario, "standard or arc")->check(CLI::IsMember({"standard", "arc"}));
  s->add_option("--size", synth.size, "image side in pixels (default: [codec] image_size)");

  EmbedArgs embed;
  auto* e = app.add_subcommand("embed", "t-SNE of the CS codes");
  add_common(e, embed.common);
  e->add_option("--codes", embed.codes, "codes.csv")->required();

  TopologyArgs topo;
  auto* t = app.add_subcommand("topology", "Mapper graph of the embedding");
  add_common(t, topo.common);
  t->add_option("--codes", topo.codes, "codes.csv")->required();
  t->add_option("--embedding", topo.embedding, "embedding.csv")->required();

  PlanArgs plan;
  auto* p = app.add_subcommand("plan", "shortest graph paths toward the opposite class");
  add_common(p, plan.common);
  p->add_option("--codes", plan.codes, "codes.csv")->required();
  p->add_option("--graph", plan.graph, "graph.json")->required();
  p->add_option("--id", plan.ids, "restrict to these abnormal record ids");

  SegmentArgs seg;
  auto* g = app.add_subcommand("segment", "counterfactual walks, difference maps and masks");
  add_common(g, seg.common);
  g->add_option("--codes", seg.codes, "codes.csv")->required();
  g->add_option("--graph", seg.graph, "graph.json (required in graph mode)");
  g->add_option("--images", seg.images, "directory of <id>.pgm originals (default: images/ next to codes)");
  g->add_option("--plans", seg.plans, "plans.json from the plan subcommand");
  g->add_option("--mode", seg.mode, "graph, linear or direct");

  EvalArgs ev;
  auto* v = app.add_subcommand("eval", "mean IOU and DICE of predicted masks");
  add_common(v, ev.common);
  v->add_option("--pred", ev.pred, "directory of predicted <id>.pgm masks")->required();
  v->add_option("--gt", ev.gt, "directory of ground-truth <id>.pgm masks")->required();

  PlotArgs pl;
  auto* l = app.add_subcommand("plot", "SVG renderings of the graph and embedding");
  add_common(l, pl.common);
  l->add_option("--graph", pl.graph, "graph.json")->required();
  l->add_option("--embedding", pl.embedding, "embedding.csv");
  l->add_option("--codes", pl.codes, "codes.csv (needed with --embedding)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForAllHelp& ex) {
    return app.exit(ex);
  } catch (const CLI::CallForVersion& ex) {
    return app.exit(ex);
  } catch (const CLI::ParseError& ex) {
    app.exit(ex);
    return 2;
  }

  try {
    if (*s) cmd_synth(synth);
    else if (*e) cmd_embed(embed);
    else if (*t) cmd_topology(topo);
    else if (*p) cmd_plan(plan);
    else if (*g) cmd_segment(seg);
    else if (*v) cmd_eval(ev);
    else if (*l) cmd_plot(pl);
  } catch (const BridgeError& ex) {
    std::fprintf(stderr, "topocf: bridge: %s (exit status %d)\n", ex.what(), ex.exit_status());
    if (!ex.stderr_text().empty()) std::fprintf(stderr, "%s", ex.stderr_text().c_str());
    return exit_code(ex.kind());
  } catch (const Error& ex) {
    std::fprintf(stderr, "topocf: %s: %s\n", to_string(ex.kind()), ex.what());
    return exit_code(ex.kind());
  } catch (const nlohmann::json::exception& ex) {
    std::fprintf(stderr, "topocf: parse: %s\n", ex.what());
    return 2;
  } catch (const std::filesystem::filesystem_error& ex) {
    std::fprintf(stderr, "topocf: io: %s\n", ex.what());
    return 2;
  }
  return 0;
}
