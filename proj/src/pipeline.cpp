#include "scengen/pipeline.hpp"

#include "scengen/csv.hpp"
#include "scengen/flow.hpp"
#include "scengen/gan.hpp"
#include "scengen/metrics.hpp"
#include "scengen/value.hpp"
#include "scengen/vae.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>

namespace scengen::pipeline {

namespace fs = std::filesystem;

namespace {

std::string join_path(const std::string& out, const std::string& name) {
  return (fs::path(out) / name).string();
}

void require_file(const std::string& path, const std::string& hint) {
  if (!fs::exists(path)) {
    throw std::runtime_error("missing artifact " + path + "; " + hint);
  }
}

std::uint64_t fnv64(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// deterministic per-task seed: same config seed and tag give the same stream
std::uint64_t mix_seed(std::uint64_t base, const std::string& tag) {
  std::uint64_t h = fnv64(tag);
  h ^= base + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h == 0 ? 1 : h;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

std::vector<int> parse_ints(const std::string& s, const std::string& context) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(static_cast<int>(csv::to_long(item, context)));
  }
  return out;
}

const std::string& meta_str(const std::map<std::string, std::string>& meta,
                            const std::string& key, const std::string& path) {
  auto it = meta.find(key);
  if (it == meta.end()) throw std::runtime_error(path + ": missing meta key '" + key + "'");
  return it->second;
}

long meta_int(const std::map<std::string, std::string>& meta, const std::string& key,
              const std::string& path) {
  return csv::to_long(meta_str(meta, key, path), path + " meta " + key);
}

double meta_num(const std::map<std::string, std::string>& meta, const std::string& key,
                const std::string& path) {
  return csv::to_double(meta_str(meta, key, path), path + " meta " + key);
}

dataio::Track cfg_track(const config::Config& cfg) {
  return dataio::track_from_name(cfg.str("run.track"));
}

dataio::TrackDataset load_dataset(const config::Config& cfg, dataio::Track track) {
  const std::string path = dataset_path(cfg.str("run.out"), track);
  require_file(path, "run the ingest command for track " + dataio::track_name(track) + " first");
  return dataio::ingest_track(path, track);
}

// design matrices for one split: targets by row, conditioning vectors by row
struct SplitData {
  Eigen::MatrixXd X, C;
  std::vector<const dataio::DayRecord*> recs;
};

SplitData split_matrices(const dataio::TrackDataset& ds, dataio::Split s) {
  SplitData sd;
  sd.recs = ds.split_days(s);
  const int n = static_cast<int>(sd.recs.size());
  sd.X.resize(n, ds.T);
  sd.C.resize(n, ds.conditioning_dim());
  for (int i = 0; i < n; ++i) {
    sd.X.row(i) = sd.recs[i]->target.transpose();
    sd.C.row(i) = dataio::conditioning_vector(ds, *sd.recs[i]).transpose();
  }
  return sd;
}

// ---------------------------------------------------------------------------
// model checkpoints: flat parameter vector plus the architecture in metadata,
// so generation rebuilds the exact network even if the config has moved on

struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<double> params;
};

void save_checkpoint(const std::string& path, const std::map<std::string, std::string>& meta,
                     const std::vector<double>& params) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(params.size());
  for (double p : params) rows.push_back({csv::format_double(p)});
  csv::write_file(path, meta, {"value"}, rows);
}

Checkpoint load_checkpoint(const std::string& path) {
  csv::Table tb = csv::read_file(path);
  const int vc = tb.column("value");
  if (vc < 0) throw std::runtime_error(path + ": checkpoint lacks a 'value' column");
  Checkpoint ck;
  ck.meta = tb.meta;
  ck.params.reserve(tb.rows.size());
  for (size_t i = 0; i < tb.rows.size(); ++i) {
    if (tb.rows[i].size() <= static_cast<size_t>(vc)) {
      throw std::runtime_error(path + ": short row " + std::to_string(i + 1));
    }
    ck.params.push_back(csv::to_double(tb.rows[i][vc], path));
  }
  const long expect = meta_int(ck.meta, "n_params", path);
  if (expect != static_cast<long>(ck.params.size())) {
    throw std::runtime_error(path + ": expected " + std::to_string(expect) + " parameters, found " +
                             std::to_string(ck.params.size()));
  }
  return ck;
}

flow::FlowConfig flow_config_from_meta(const Checkpoint& ck, const std::string& path) {
  flow::FlowConfig fc;
  fc.T = static_cast<int>(meta_int(ck.meta, "T", path));
  fc.c_dim = static_cast<int>(meta_int(ck.meta, "c_dim", path));
  fc.embedding_size = static_cast<int>(meta_int(ck.meta, "embedding_size", path));
  fc.conditioner_hidden = parse_ints(meta_str(ck.meta, "conditioner_hidden", path), path);
  fc.integrand_hidden = parse_ints(meta_str(ck.meta, "integrand_hidden", path), path);
  fc.offset_hidden = parse_ints(meta_str(ck.meta, "offset_hidden", path), path);
  fc.quad_order = static_cast<int>(meta_int(ck.meta, "quad_order", path));
  fc.affine = meta_int(ck.meta, "affine", path) != 0;
  fc.affine_steps = static_cast<int>(meta_int(ck.meta, "affine_steps", path));
  return fc;
}

vae::VaeConfig vae_config_from_meta(const Checkpoint& ck, const std::string& path) {
  vae::VaeConfig vc;
  vc.T = static_cast<int>(meta_int(ck.meta, "T", path));
  vc.c_dim = static_cast<int>(meta_int(ck.meta, "c_dim", path));
  vc.latent_dim = static_cast<int>(meta_int(ck.meta, "latent_dim", path));
  vc.encoder_hidden = parse_ints(meta_str(ck.meta, "encoder_hidden", path), path);
  vc.decoder_hidden = parse_ints(meta_str(ck.meta, "decoder_hidden", path), path);
  return vc;
}

gan::GanConfig gan_config_from_meta(const Checkpoint& ck, const std::string& path) {
  gan::GanConfig gc;
  gc.T = static_cast<int>(meta_int(ck.meta, "T", path));
  gc.c_dim = static_cast<int>(meta_int(ck.meta, "c_dim", path));
  gc.latent_dim = static_cast<int>(meta_int(ck.meta, "latent_dim", path));
  gc.generator_hidden = parse_ints(meta_str(ck.meta, "generator_hidden", path), path);
  gc.critic_hidden = parse_ints(meta_str(ck.meta, "critic_hidden", path), path);
  gc.lambda_gp = meta_num(ck.meta, "lambda_gp", path);
  gc.critic_steps = static_cast<int>(meta_int(ck.meta, "critic_steps", path));
  return gc;
}

const std::vector<std::string> kModels = {"nf", "vae", "gan", "rand"};

void check_model_name(const std::string& model) {
  if (std::find(kModels.begin(), kModels.end(), model) == kModels.end()) {
    throw std::invalid_argument("unknown model '" + model + "' (expected nf, vae, gan or rand)");
  }
}

std::string block_key(const std::string& day, int zone) {
  return day + "|" + std::to_string(zone);
}

// index scenario blocks by (day, zone); the model column is per file here
std::map<std::string, const ScenarioBlock*> index_blocks(const ScenarioFileData& sf) {
  std::map<std::string, const ScenarioBlock*> ix;
  for (const auto& b : sf.blocks) ix[block_key(b.day, b.zone)] = &b;
  return ix;
}

}  // namespace

// ---------------------------------------------------------------------------
// artifact paths

std::string dataset_path(const std::string& out, dataio::Track track) {
  return join_path(out, "dataset_" + dataio::track_name(track) + ".csv");
}

std::string checkpoint_path(const std::string& out, const std::string& model,
                            dataio::Track track) {
  return join_path(out, "checkpoint_" + model + "_" + dataio::track_name(track) + ".csv");
}

std::string scenario_path(const std::string& out, const std::string& model, dataio::Track track,
                          dataio::Split split) {
  return join_path(out, "scenarios_" + model + "_" + dataio::track_name(track) + "_" +
                            dataio::split_name(split) + ".csv");
}

std::string quality_days_path(const std::string& out, dataio::Track track) {
  return join_path(out, "quality_days_" + dataio::track_name(track) + ".csv");
}

std::string quality_summary_path(const std::string& out, dataio::Track track) {
  return join_path(out, "quality_summary_" + dataio::track_name(track) + ".csv");
}

std::string quality_curves_path(const std::string& out, dataio::Track track) {
  return join_path(out, "quality_curves_" + dataio::track_name(track) + ".csv");
}

std::string value_days_path(const std::string& out) { return join_path(out, "value_days.csv"); }

std::string value_campaign_path(const std::string& out) {
  return join_path(out, "value_campaign.csv");
}

std::string table_quality_path(const std::string& out) {
  return join_path(out, "table_quality.csv");
}

std::string table_value_path(const std::string& out) { return join_path(out, "table_value.csv"); }

// ---------------------------------------------------------------------------
// scenario files

void write_scenario_file(const std::string& path, const std::vector<ScenarioBlock>& blocks,
                         const std::map<std::string, std::string>& meta) {
  if (blocks.empty()) throw std::invalid_argument(path + ": refusing to write an empty scenario file");
  const int T = static_cast<int>(blocks.front().scenarios.cols());
  const int M = static_cast<int>(blocks.front().scenarios.rows());
  const bool with_density = blocks.front().log_density.size() > 0;

  std::vector<std::string> header = {"model", "day", "zone", "scenario_idx"};
  for (int t = 0; t < T; ++t) header.push_back("t_" + std::to_string(t));
  if (with_density) header.push_back("log_density");

  std::vector<std::vector<std::string>> rows;
  rows.reserve(blocks.size() * static_cast<size_t>(M));
  for (const auto& b : blocks) {
    if (b.scenarios.rows() != M || b.scenarios.cols() != T) {
      throw std::invalid_argument(path + ": block " + block_key(b.day, b.zone) +
                                  " has inconsistent dimensions");
    }
    if ((b.log_density.size() > 0) != with_density || (with_density && b.log_density.size() != M)) {
      throw std::invalid_argument(path + ": block " + block_key(b.day, b.zone) +
                                  " has inconsistent log densities");
    }
    if (!b.scenarios.allFinite()) {
      throw std::invalid_argument(path + ": block " + block_key(b.day, b.zone) +
                                  " contains non-finite values");
    }
    for (int i = 0; i < M; ++i) {
      std::vector<std::string> row = {b.model, b.day, std::to_string(b.zone), std::to_string(i)};
      for (int t = 0; t < T; ++t) row.push_back(csv::format_double(b.scenarios(i, t)));
      if (with_density) row.push_back(csv::format_double(b.log_density(i)));
      rows.push_back(std::move(row));
    }
  }

  std::map<std::string, std::string> full = meta;
  full["count"] = std::to_string(M);
  full["T"] = std::to_string(T);
  csv::write_file(path, full, header, rows);
}

ScenarioFileData read_scenario_file(const std::string& path) {
  csv::Table tb = csv::read_file(path);
  const int mc = tb.column("model"), dc = tb.column("day"), zc = tb.column("zone"),
            ic = tb.column("scenario_idx");
  if (mc < 0 || dc < 0 || zc < 0 || ic < 0) {
    throw std::runtime_error(path + ": expected model, day, zone and scenario_idx columns");
  }
  std::vector<int> tcols;
  while (true) {
    const int c = tb.column("t_" + std::to_string(tcols.size()));
    if (c < 0) break;
    tcols.push_back(c);
  }
  const int T = static_cast<int>(tcols.size());
  if (T == 0) throw std::runtime_error(path + ": no t_0.. value columns found");
  const int ldc = tb.column("log_density");

  ScenarioFileData sf;
  sf.meta = tb.meta;
  const long M = meta_int(tb.meta, "count", path);
  if (M <= 0) throw std::runtime_error(path + ": meta count must be positive");

  size_t width = static_cast<size_t>(std::max({mc, dc, zc, ic}));
  for (int c : tcols) width = std::max(width, static_cast<size_t>(c));
  if (ldc >= 0) width = std::max(width, static_cast<size_t>(ldc));
  ++width;

  std::set<std::string> seen;
  ScenarioBlock cur;
  long cur_rows = 0;
  auto flush = [&]() {
    if (cur_rows == 0) return;
    if (cur_rows != M) {
      throw std::runtime_error(path + ": block " + block_key(cur.day, cur.zone) + " has " +
                               std::to_string(cur_rows) + " rows, expected " + std::to_string(M));
    }
    sf.blocks.push_back(std::move(cur));
    cur = ScenarioBlock{};
    cur_rows = 0;
  };

  for (size_t r = 0; r < tb.rows.size(); ++r) {
    const auto& row = tb.rows[r];
    const std::string where = path + " row " + std::to_string(r + 1);
    if (row.size() < width) throw std::runtime_error(where + ": short row");
    const std::string& model = row[mc];
    const std::string& day = row[dc];
    const int zone = static_cast<int>(csv::to_long(row[zc], where));
    const long idx = csv::to_long(row[ic], where);

    if (cur_rows == 0 || model != cur.model || day != cur.day || zone != cur.zone) {
      flush();
      const std::string key = model + "|" + block_key(day, zone);
      if (!seen.insert(key).second) {
        throw std::runtime_error(path + ": rows for " + key + " are not contiguous");
      }
      cur.model = model;
      cur.day = day;
      cur.zone = zone;
      cur.scenarios.resize(M, T);
      if (ldc >= 0) cur.log_density.resize(M);
    }
    if (idx != cur_rows) {
      throw std::runtime_error(where + ": scenario_idx " + std::to_string(idx) + ", expected " +
                               std::to_string(cur_rows));
    }
    for (int t = 0; t < T; ++t) {
      const double v = csv::to_double(row[tcols[t]], where);
      if (!std::isfinite(v)) throw std::runtime_error(where + ": non-finite scenario value");
      cur.scenarios(cur_rows, t) = v;
    }
    if (ldc >= 0) {
      const double v = csv::to_double(row[ldc], where);
      if (!std::isfinite(v)) throw std::runtime_error(where + ": non-finite log density");
      cur.log_density(cur_rows) = v;
    }
    ++cur_rows;
  }
  flush();
  if (sf.blocks.empty()) throw std::runtime_error(path + ": no scenario rows");
  return sf;
}

Eigen::MatrixXd pad_columns(const Eigen::MatrixXd& s, const std::vector<int>& removed,
                            int full_T) {
  if (static_cast<int>(s.cols()) + static_cast<int>(removed.size()) != full_T) {
    throw std::invalid_argument("pad_columns: " + std::to_string(s.cols()) + " columns plus " +
                                std::to_string(removed.size()) + " removed do not make " +
                                std::to_string(full_T));
  }
  std::vector<char> is_removed(static_cast<size_t>(full_T), 0);
  for (int r : removed) {
    if (r < 0 || r >= full_T || is_removed[static_cast<size_t>(r)]) {
      throw std::invalid_argument("pad_columns: bad removed index " + std::to_string(r));
    }
    is_removed[static_cast<size_t>(r)] = 1;
  }
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(s.rows(), full_T);
  int src = 0;
  for (int c = 0; c < full_T; ++c) {
    if (!is_removed[static_cast<size_t>(c)]) out.col(c) = s.col(src++);
  }
  return out;
}

// ---------------------------------------------------------------------------
// commands

void cmd_ingest(const config::Config& cfg) {
  const dataio::Track track = cfg_track(cfg);
  const std::string key = "data." + dataio::track_name(track);
  const std::string raw = cfg.str(key);
  if (raw.empty()) {
    throw std::invalid_argument(key + " is not set; point it at the raw " +
                                dataio::track_name(track) + " CSV");
  }
  require_file(raw, "set " + key + " to an existing file");

  dataio::TrackDataset ds = dataio::ingest_track(raw, track);
  dataio::split_dataset(ds, static_cast<std::uint64_t>(cfg.integer("data.split_seed")),
                        static_cast<int>(cfg.integer("data.vs_dates")),
                        static_cast<int>(cfg.integer("data.ts_dates")));
  dataio::standardize(ds);

  const std::string path = dataset_path(cfg.str("run.out"), track);
  dataio::serialize_dataset(ds, path, cfg.hash);
  std::cout << "ingest: wrote " << path << " (" << ds.days.size() << " day records, T=" << ds.T
            << ", " << ds.n_zones << " zones)\n";
  for (const auto& w : ds.warnings) std::cout << "ingest: note: " << w << "\n";
}

void cmd_train(const config::Config& cfg) {
  const dataio::Track track = cfg_track(cfg);
  const std::string model = cfg.str("run.model");
  check_model_name(model);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer("run.seed"));

  const dataio::TrackDataset ds = load_dataset(cfg, track);
  const SplitData ls = split_matrices(ds, dataio::Split::ls);
  const SplitData vs = split_matrices(ds, dataio::Split::vs);
  if (ls.X.rows() == 0) throw std::runtime_error("dataset has no learning days");

  std::map<std::string, std::string> meta;
  meta["config"] = cfg.hash;
  meta["model"] = model;
  meta["track"] = dataio::track_name(track);
  meta["T"] = std::to_string(ds.T);
  meta["c_dim"] = std::to_string(ds.conditioning_dim());
  meta["seed"] = std::to_string(seed);

  std::vector<double> params;
  if (model == "nf") {
    flow::FlowConfig fc;
    fc.T = ds.T;
    fc.c_dim = ds.conditioning_dim();
    fc.embedding_size = static_cast<int>(cfg.integer("nf.embedding_size"));
    fc.conditioner_hidden = cfg.int_list("nf.conditioner_hidden");
    fc.integrand_hidden = cfg.int_list("nf.integrand_hidden");
    fc.offset_hidden = cfg.int_list("nf.offset_hidden");
    fc.quad_order = static_cast<int>(cfg.integer("nf.quad_order"));
    fc.affine = cfg.flag("nf.affine");
    fc.affine_steps = static_cast<int>(cfg.integer("nf.affine_steps"));
    flow::ConditionalFlow f(fc);
    f.init(seed);
    flow::FitOptions fo;
    fo.epochs = static_cast<int>(cfg.integer("nf.epochs"));
    fo.lr = cfg.number("nf.lr");
    fo.weight_decay = cfg.number("nf.weight_decay");
    fo.batch_fraction = cfg.number("nf.batch_fraction");
    fo.seed = seed;
    f.fit(ls.X, ls.C, vs.X, vs.C, fo);
    f.get_params(params);
    meta["embedding_size"] = std::to_string(fc.embedding_size);
    meta["conditioner_hidden"] = join_ints(fc.conditioner_hidden);
    meta["integrand_hidden"] = join_ints(fc.integrand_hidden);
    meta["offset_hidden"] = join_ints(fc.offset_hidden);
    meta["quad_order"] = std::to_string(fc.quad_order);
    meta["affine"] = fc.affine ? "1" : "0";
    meta["affine_steps"] = std::to_string(fc.affine_steps);
  } else if (model == "vae") {
    vae::VaeConfig vc;
    vc.T = ds.T;
    vc.c_dim = ds.conditioning_dim();
    vc.latent_dim = static_cast<int>(cfg.integer("vae.latent_dim"));
    vc.encoder_hidden = cfg.int_list("vae.encoder_hidden");
    vc.decoder_hidden = cfg.int_list("vae.decoder_hidden");
    vae::GaussianVae v(vc);
    v.init(seed);
    vae::FitOptions fo;
    fo.epochs = static_cast<int>(cfg.integer("vae.epochs"));
    fo.lr = cfg.number("vae.lr");
    fo.weight_decay = cfg.number("vae.weight_decay");
    fo.batch_fraction = cfg.number("vae.batch_fraction");
    fo.seed = seed;
    v.fit(ls.X, ls.C, vs.X, vs.C, fo);
    v.get_params(params);
    meta["latent_dim"] = std::to_string(vc.latent_dim);
    meta["encoder_hidden"] = join_ints(vc.encoder_hidden);
    meta["decoder_hidden"] = join_ints(vc.decoder_hidden);
  } else if (model == "gan") {
    gan::GanConfig gc;
    gc.T = ds.T;
    gc.c_dim = ds.conditioning_dim();
    gc.latent_dim = static_cast<int>(cfg.integer("gan.latent_dim"));
    gc.generator_hidden = cfg.int_list("gan.generator_hidden");
    gc.critic_hidden = cfg.int_list("gan.critic_hidden");
    gc.lambda_gp = cfg.number("gan.lambda_gp");
    gc.critic_steps = static_cast<int>(cfg.integer("gan.critic_steps"));
    gan::WganGp g(gc);
    g.init(seed);
    gan::FitOptions fo;
    fo.epochs = static_cast<int>(cfg.integer("gan.epochs"));
    fo.lr = cfg.number("gan.lr");
    fo.weight_decay = cfg.number("gan.weight_decay");
    fo.batch_fraction = cfg.number("gan.batch_fraction");
    fo.checkpoint_every = static_cast<int>(cfg.integer("gan.checkpoint_every"));
    fo.es_scenarios = static_cast<int>(cfg.integer("gan.es_scenarios"));
    fo.seed = seed;
    g.fit(ls.X, ls.C, vs.X, vs.C, fo);
    g.get_params(params);
    meta["latent_dim"] = std::to_string(gc.latent_dim);
    meta["generator_hidden"] = join_ints(gc.generator_hidden);
    meta["critic_hidden"] = join_ints(gc.critic_hidden);
    meta["lambda_gp"] = csv::format_double(gc.lambda_gp);
    meta["critic_steps"] = std::to_string(gc.critic_steps);
  }
  // rand has no parameters; its checkpoint records that training happened
  meta["n_params"] = std::to_string(params.size());

  const std::string path = checkpoint_path(cfg.str("run.out"), model, track);
  save_checkpoint(path, meta, params);
  std::cout << "train: wrote " << path << " (" << params.size() << " parameters)\n";
}

void cmd_generate(const config::Config& cfg) {
  const dataio::Track track = cfg_track(cfg);
  const std::string model = cfg.str("run.model");
  check_model_name(model);
  const dataio::Split split = dataio::split_from_name(cfg.str("scenarios.split"));
  const int M = static_cast<int>(cfg.integer("scenarios.count"));
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.integer("run.seed"));

  const dataio::TrackDataset ds = load_dataset(cfg, track);
  const std::string ck_path = checkpoint_path(cfg.str("run.out"), model, track);
  require_file(ck_path, "run the train command for model " + model + " first");
  const Checkpoint ck = load_checkpoint(ck_path);
  if (meta_str(ck.meta, "model", ck_path) != model ||
      meta_str(ck.meta, "track", ck_path) != dataio::track_name(track)) {
    throw std::runtime_error(ck_path + ": checkpoint is for model=" +
                             meta_str(ck.meta, "model", ck_path) + " track=" +
                             meta_str(ck.meta, "track", ck_path));
  }
  if (meta_int(ck.meta, "T", ck_path) != ds.T ||
      meta_int(ck.meta, "c_dim", ck_path) != ds.conditioning_dim()) {
    throw std::runtime_error(ck_path + ": checkpoint dimensions do not match the dataset");
  }

  const auto recs = ds.split_days(split);
  if (recs.empty()) {
    throw std::runtime_error("dataset has no " + dataio::split_name(split) + " days");
  }

  // models are rebuilt from checkpoint metadata, not from the live config
  flow::ConditionalFlow* f = nullptr;
  vae::GaussianVae* v = nullptr;
  gan::WganGp* g = nullptr;
  std::unique_ptr<flow::ConditionalFlow> f_own;
  std::unique_ptr<vae::GaussianVae> v_own;
  std::unique_ptr<gan::WganGp> g_own;
  Eigen::MatrixXd split_obs;  // rand resamples the day's own split
  if (model == "nf") {
    f_own = std::make_unique<flow::ConditionalFlow>(flow_config_from_meta(ck, ck_path));
    f_own->set_params(ck.params);
    f = f_own.get();
  } else if (model == "vae") {
    v_own = std::make_unique<vae::GaussianVae>(vae_config_from_meta(ck, ck_path));
    v_own->set_params(ck.params);
    v = v_own.get();
  } else if (model == "gan") {
    g_own = std::make_unique<gan::WganGp>(gan_config_from_meta(ck, ck_path));
    g_own->set_params(ck.params);
    g = g_own.get();
  } else {
    split_obs.resize(static_cast<int>(recs.size()), ds.T);
    for (size_t i = 0; i < recs.size(); ++i) split_obs.row(static_cast<int>(i)) = recs[i]->target;
  }

  std::vector<ScenarioBlock> blocks;
  blocks.reserve(recs.size());
  for (const auto* rec : recs) {
    const std::uint64_t sd =
        mix_seed(seed, model + "|" + rec->day + "|" + std::to_string(rec->zone));
    const Eigen::VectorXd c = dataio::conditioning_vector(ds, *rec);
    ScenarioBlock b;
    b.model = model;
    b.day = rec->day;
    b.zone = rec->zone;
    if (f) {
      Eigen::VectorXd logd;
      b.scenarios = f->sample(c, M, sd, &logd);
      b.log_density = logd;
    } else if (v) {
      b.scenarios = v->sample(c, M, sd, cfg.flag("vae.decoder_noise"));
    } else if (g) {
      b.scenarios = g->sample(c, M, sd);
    } else {
      nn::Rng rng(sd);
      b.scenarios = metrics::rand_scenarios(split_obs, M, rng);
    }
    if (!b.scenarios.allFinite()) {
      throw std::runtime_error("model " + model + " produced non-finite scenarios for day " +
                               rec->day + " zone " + std::to_string(rec->zone));
    }
    blocks.push_back(std::move(b));
  }

  std::map<std::string, std::string> meta;
  meta["config"] = cfg.hash;
  meta["model"] = model;
  meta["track"] = dataio::track_name(track);
  meta["split"] = dataio::split_name(split);
  meta["seed"] = std::to_string(seed);
  const std::string path = scenario_path(cfg.str("run.out"), model, track, split);
  write_scenario_file(path, blocks, meta);
  std::cout << "generate: wrote " << path << " (" << blocks.size() << " blocks x " << M
            << " scenarios)\n";
}

void cmd_eval_quality(const config::Config& cfg) {
  const dataio::Track track = cfg_track(cfg);
  const std::string out = cfg.str("run.out");
  const std::vector<std::string> models = cfg.str_list("quality.models");
  if (models.empty()) throw std::invalid_argument("quality.models is empty");
  for (const auto& m : models) check_model_name(m);

  const dataio::TrackDataset ds = load_dataset(cfg, track);
  const auto ts_recs = ds.split_days(dataio::Split::ts);
  if (ts_recs.empty()) throw std::runtime_error("dataset has no ts days");
  const int n_ts = static_cast<int>(ts_recs.size());
  Eigen::MatrixXd obs(n_ts, ds.T);
  for (int i = 0; i < n_ts; ++i) obs.row(i) = ts_recs[i]->target.transpose();

  const bool run_c2st = cfg.flag("quality.c2st");
  std::vector<std::vector<std::string>> day_rows, summary_rows, curve_rows;
  std::map<std::string, Eigen::VectorXd> crps_by_model, es_by_model;

  // c2st context rows are shared across models
  Eigen::MatrixXd ctx_ts, obs_ls, ctx_ls;
  std::vector<const dataio::DayRecord*> ls_recs;
  if (run_c2st) {
    ctx_ts.resize(n_ts, ds.conditioning_dim());
    for (int i = 0; i < n_ts; ++i) {
      ctx_ts.row(i) = dataio::conditioning_vector(ds, *ts_recs[i]).transpose();
    }
    ls_recs = ds.split_days(dataio::Split::ls);
    if (ls_recs.empty()) throw std::runtime_error("dataset has no ls days");
    obs_ls.resize(static_cast<int>(ls_recs.size()), ds.T);
    ctx_ls.resize(static_cast<int>(ls_recs.size()), ds.conditioning_dim());
    for (size_t i = 0; i < ls_recs.size(); ++i) {
      obs_ls.row(static_cast<int>(i)) = ls_recs[i]->target.transpose();
      ctx_ls.row(static_cast<int>(i)) = dataio::conditioning_vector(ds, *ls_recs[i]).transpose();
    }
  }

  for (const auto& m : models) {
    const std::string sp = scenario_path(out, m, track, dataio::Split::ts);
    require_file(sp, "run the generate command for model " + m + " with scenarios.split=ts");
    const ScenarioFileData sf = read_scenario_file(sp);
    const auto ix = index_blocks(sf);

    std::string gaps;
    for (const auto* rec : ts_recs) {
      if (!ix.count(block_key(rec->day, rec->zone))) {
        gaps += "\n  " + m + ": " + rec->day + " zone " + std::to_string(rec->zone);
      }
    }
    if (!gaps.empty()) {
      throw std::runtime_error(sp + " is missing ts days (regenerate with scenarios.split=ts):" +
                               gaps);
    }

    double crps_sum = 0, qs_sum = 0, es_sum = 0, vs_sum = 0;
    Eigen::VectorXd crps_days(n_ts), es_days(n_ts);
    std::vector<Eigen::MatrixXd> quantiles_per_day;
    quantiles_per_day.reserve(static_cast<size_t>(n_ts));
    Eigen::MatrixXd corr_sum = Eigen::MatrixXd::Zero(ds.T, ds.T);
    const int fan_day =
        std::clamp(static_cast<int>(cfg.integer("quality.fan_day")), 0, n_ts - 1);

    for (int d = 0; d < n_ts; ++d) {
      const auto* rec = ts_recs[d];
      const ScenarioBlock& b = *ix.at(block_key(rec->day, rec->zone));
      if (b.scenarios.cols() != ds.T) {
        throw std::runtime_error(sp + ": block " + block_key(rec->day, rec->zone) + " has " +
                                 std::to_string(b.scenarios.cols()) + " periods, dataset has " +
                                 std::to_string(ds.T));
      }
      const Eigen::VectorXd& x = rec->target;
      const double crps_d = metrics::crps(b.scenarios, x).mean();
      const Eigen::MatrixXd Q = metrics::empirical_quantiles(b.scenarios);
      const double qs_d = metrics::quantile_score(Q, x).mean();
      const double es_d = metrics::energy_score(b.scenarios, x);
      const double vs_d = metrics::variogram_score(b.scenarios, x);
      crps_days(d) = crps_d;
      es_days(d) = es_d;
      crps_sum += crps_d;
      qs_sum += qs_d;
      es_sum += es_d;
      vs_sum += vs_d;
      quantiles_per_day.push_back(Q);
      corr_sum += metrics::correlation_matrix(b.scenarios).rho;

      day_rows.push_back({m, rec->day, std::to_string(rec->zone), csv::format_double(crps_d),
                          csv::format_double(qs_d), csv::format_double(es_d),
                          csv::format_double(vs_d)});

      if (d == fan_day) {
        for (int q = 0; q < Q.rows(); ++q) {
          for (int t = 0; t < ds.T; ++t) {
            curve_rows.push_back({m, "fan", std::to_string(q + 1), std::to_string(t),
                                  csv::format_double(Q(q, t))});
          }
        }
        for (int t = 0; t < ds.T; ++t) {
          curve_rows.push_back({m, "fan_obs", "0", std::to_string(t), csv::format_double(x(t))});
        }
      }
    }

    const metrics::Reliability rel = metrics::reliability(quantiles_per_day, obs);
    for (int q = 0; q < rel.nominal.size(); ++q) {
      curve_rows.push_back({m, "reliability", "0", csv::format_double(rel.nominal(q)),
                            csv::format_double(rel.observed(q))});
    }
    const Eigen::MatrixXd corr = corr_sum / n_ts;
    for (int r = 0; r < ds.T; ++r) {
      for (int c = 0; c < ds.T; ++c) {
        curve_rows.push_back({m, "correlation", std::to_string(r), std::to_string(c),
                              csv::format_double(corr(r, c))});
      }
    }

    std::string auc_cell;
    if (run_c2st) {
      const std::string lp = scenario_path(out, m, track, dataio::Split::ls);
      require_file(lp, "run the generate command for model " + m + " with scenarios.split=ls");
      const ScenarioFileData lf = read_scenario_file(lp);
      const auto lx = index_blocks(lf);
      std::string ls_gaps;
      for (const auto* rec : ls_recs) {
        if (!lx.count(block_key(rec->day, rec->zone))) {
          ls_gaps += "\n  " + m + ": " + rec->day + " zone " + std::to_string(rec->zone);
        }
      }
      if (!ls_gaps.empty()) {
        throw std::runtime_error(lp + " is missing ls days (regenerate with scenarios.split=ls):" +
                                 ls_gaps);
      }
      const long M_ts = meta_int(sf.meta, "count", sp);
      const long M_ls = meta_int(lf.meta, "count", lp);
      const int n_cls = static_cast<int>(std::min(M_ts, M_ls));
      double auc_sum = 0;
      for (int i = 0; i < n_cls; ++i) {
        Eigen::MatrixXd gen_ls(obs_ls.rows(), ds.T), gen_ts(n_ts, ds.T);
        for (size_t d = 0; d < ls_recs.size(); ++d) {
          gen_ls.row(static_cast<int>(d)) =
              lx.at(block_key(ls_recs[d]->day, ls_recs[d]->zone))->scenarios.row(i);
        }
        for (int d = 0; d < n_ts; ++d) {
          gen_ts.row(d) = ix.at(block_key(ts_recs[d]->day, ts_recs[d]->zone))->scenarios.row(i);
        }
        metrics::C2stOptions co;
        co.forest.n_trees = static_cast<int>(cfg.integer("quality.c2st_trees"));
        co.forest.seed = mix_seed(static_cast<std::uint64_t>(cfg.integer("run.seed")),
                                  "c2st|" + m + "|" + std::to_string(i));
        co.keep_roc = true;
        const metrics::C2stResult cr =
            metrics::c2st_single(gen_ls, obs_ls, ctx_ls, gen_ts, obs, ctx_ts, co);
        auc_sum += cr.auc;
        for (const auto& [fpr, tpr] : cr.roc) {
          curve_rows.push_back({m, "roc", std::to_string(i), csv::format_double(fpr),
                                csv::format_double(tpr)});
        }
      }
      auc_cell = csv::format_double(auc_sum / n_cls);
    }

    crps_by_model[m] = crps_days;
    es_by_model[m] = es_days;
    summary_rows.push_back({m, csv::format_double(100 * crps_sum / n_ts),
                            csv::format_double(100 * qs_sum / n_ts),
                            csv::format_double(100 * es_sum / n_ts),
                            csv::format_double(vs_sum / n_ts), csv::format_double(rel.mae_r),
                            auc_cell});
  }

  // pairwise forecast-skill comparisons on the shared test days
  for (const auto& g : models) {
    for (const auto& h : models) {
      if (g == h) continue;
      const metrics::DmResult dc = metrics::dm_test(crps_by_model[g], crps_by_model[h]);
      const metrics::DmResult de = metrics::dm_test(es_by_model[g], es_by_model[h]);
      curve_rows.push_back({g, "dm_crps", h, csv::format_double(dc.statistic),
                            csv::format_double(dc.p_value)});
      curve_rows.push_back({g, "dm_es", h, csv::format_double(de.statistic),
                            csv::format_double(de.p_value)});
    }
  }

  std::map<std::string, std::string> meta;
  meta["config"] = cfg.hash;
  meta["track"] = dataio::track_name(track);
  meta["split"] = "ts";
  std::string joined;
  for (size_t i = 0; i < models.size(); ++i) joined += (i ? "," : "") + models[i];
  meta["models"] = joined;

  csv::write_file(quality_days_path(out, track), meta,
                  {"model", "day", "zone", "crps", "qs", "es", "vs"}, day_rows);
  csv::write_file(quality_summary_path(out, track), meta,
                  {"model", "crps_x100", "qs_x100", "es_x100", "vs", "mae_r_pct", "c2st_auc"},
                  summary_rows);
  csv::write_file(quality_curves_path(out, track), meta, {"model", "family", "group", "x", "y"},
                  curve_rows);
  std::cout << "eval-quality: wrote " << quality_summary_path(out, track) << " (" << models.size()
            << " models x " << n_ts << " test days)\n";
}

void cmd_eval_value(const config::Config& cfg) {
  const std::string out = cfg.str("run.out");
  const std::vector<std::string> models = cfg.str_list("value.models");
  if (models.empty()) throw std::invalid_argument("value.models is empty");
  for (const auto& m : models) check_model_name(m);

  const dataio::TrackDataset ds_pv = load_dataset(cfg, dataio::Track::pv);
  const dataio::TrackDataset ds_wind = load_dataset(cfg, dataio::Track::wind);
  const dataio::TrackDataset ds_load = load_dataset(cfg, dataio::Track::load);

  const std::string price_path = cfg.str("data.prices");
  require_file(price_path, "set data.prices to a hour,price_eur_mwh CSV");
  const Eigen::VectorXd prices = value::load_price_csv(price_path);
  const int T = static_cast<int>(prices.size());
  if (ds_wind.T != T || ds_load.T != T) {
    throw std::runtime_error("price file has " + std::to_string(T) +
                             " periods but wind/load datasets have " + std::to_string(ds_wind.T) +
                             "/" + std::to_string(ds_load.T));
  }
  if (ds_pv.T + static_cast<int>(ds_pv.removed_periods.size()) != T) {
    throw std::runtime_error("pv dataset has " + std::to_string(ds_pv.T) + " periods plus " +
                             std::to_string(ds_pv.removed_periods.size()) +
                             " removed; cannot cover " + std::to_string(T) + " price periods");
  }

  std::vector<int> pv_zones = cfg.int_list("value.pv_zones");
  std::vector<int> wind_zones = cfg.int_list("value.wind_zones");
  if (pv_zones.empty()) {
    for (int z = 1; z <= ds_pv.n_zones; ++z) pv_zones.push_back(z);
  }
  if (wind_zones.empty()) {
    for (int z = 1; z <= ds_wind.n_zones; ++z) wind_zones.push_back(z);
  }
  const int load_zone = static_cast<int>(cfg.integer("value.load_zone"));

  // observations per track, keyed by (day, zone)
  auto obs_index = [](const dataio::TrackDataset& ds) {
    std::map<std::string, const dataio::DayRecord*> ix;
    for (const auto* rec : ds.split_days(dataio::Split::ts)) {
      ix[block_key(rec->day, rec->zone)] = rec;
    }
    return ix;
  };
  const auto pv_obs = obs_index(ds_pv);
  const auto wind_obs = obs_index(ds_wind);
  const auto load_obs = obs_index(ds_load);

  // trading dates where every needed zone is a test day in all three tracks
  std::set<std::string> dates;
  for (const auto& [key, rec] : load_obs) {
    if (rec->zone == load_zone) dates.insert(rec->day);
  }
  for (auto it = dates.begin(); it != dates.end();) {
    bool ok = true;
    for (int z : pv_zones) ok = ok && pv_obs.count(block_key(*it, z));
    for (int z : wind_zones) ok = ok && wind_obs.count(block_key(*it, z));
    it = ok ? std::next(it) : dates.erase(it);
  }
  if (dates.empty()) {
    throw std::runtime_error("no trading dates are test days across all three tracks");
  }
  std::vector<std::string> date_list(dates.begin(), dates.end());
  const long cap = cfg.integer("value.days");
  if (cap > 0 && static_cast<long>(date_list.size()) > cap) {
    date_list.resize(static_cast<size_t>(cap));
  }

  // scenario files per model per track
  struct TrackFiles {
    std::map<std::string, const ScenarioBlock*> pv, wind, load;
  };
  const int K = static_cast<int>(cfg.integer("value.scenario_count"));
  std::map<std::string, ScenarioFileData> store;  // keeps blocks alive
  std::map<std::string, TrackFiles> files;
  for (const auto& m : models) {
    for (dataio::Track tr : {dataio::Track::pv, dataio::Track::wind, dataio::Track::load}) {
      const std::string sp = scenario_path(out, m, tr, dataio::Split::ts);
      require_file(sp, "run generate for model " + m + " on track " + dataio::track_name(tr) +
                           " with scenarios.split=ts");
      store[sp] = read_scenario_file(sp);
      auto& tf = files[m];
      auto ix = index_blocks(store[sp]);
      if (tr == dataio::Track::pv) {
        tf.pv = std::move(ix);
      } else if (tr == dataio::Track::wind) {
        tf.wind = std::move(ix);
      } else {
        tf.load = std::move(ix);
      }
    }
  }

  // every (model, date, zone) must have at least K scenarios on every track
  std::string gaps;
  auto check_block = [&](const std::map<std::string, const ScenarioBlock*>& ix,
                         const std::string& m, const std::string& day, int zone,
                         const std::string& tr) {
    auto it = ix.find(block_key(day, zone));
    if (it == ix.end()) {
      gaps += "\n  " + m + "/" + tr + " " + day + " zone " + std::to_string(zone) + ": missing";
    } else if (it->second->scenarios.rows() < K) {
      gaps += "\n  " + m + "/" + tr + " " + day + " zone " + std::to_string(zone) + ": only " +
              std::to_string(it->second->scenarios.rows()) + " scenarios, need " +
              std::to_string(K);
    }
  };
  for (const auto& m : models) {
    for (const auto& day : date_list) {
      for (int z : pv_zones) check_block(files[m].pv, m, day, z, "pv");
      for (int z : wind_zones) check_block(files[m].wind, m, day, z, "wind");
      check_block(files[m].load, m, day, load_zone, "load");
    }
  }
  if (!gaps.empty()) throw std::runtime_error("scenario coverage is incomplete:" + gaps);

  // pv scenarios and observations regain the removed always-zero periods
  auto pad_pv = [&](const Eigen::MatrixXd& s) { return pad_columns(s, ds_pv.removed_periods, T); };

  // generated scenarios can stray outside the physical range; availability is
  // floored at zero and load capped at the bid bound so the recourse LP stays
  // feasible (pv and wind above capacity are merely curtailable)
  const value::BiddingInstance proto = value::market_instance(prices);
  auto clamp_avail = [](Eigen::MatrixXd m) { return m.cwiseMax(0.0).eval(); };
  auto clamp_load = [&](Eigen::MatrixXd m) {
    return m.cwiseMax(0.0).cwiseMin(proto.y_max).eval();
  };

  std::vector<value::CampaignDay> days;
  days.reserve(date_list.size() * pv_zones.size() * wind_zones.size());
  for (const auto& day : date_list) {
    for (int pz : pv_zones) {
      for (int wz : wind_zones) {
        value::CampaignDay cd;
        cd.label = day + "|pv" + std::to_string(pz) + "|wind" + std::to_string(wz);
        cd.prices = prices;
        cd.observed.pv = clamp_avail(
            pad_pv(pv_obs.at(block_key(day, pz))->target.transpose())).row(0).transpose();
        cd.observed.wind = clamp_avail(wind_obs.at(block_key(day, wz))->target.transpose())
                               .row(0).transpose();
        cd.observed.load = clamp_load(load_obs.at(block_key(day, load_zone))->target.transpose())
                               .row(0).transpose();
        for (const auto& m : models) {
          value::ScenarioSet ss;
          ss.pv = clamp_avail(pad_pv(files[m].pv.at(block_key(day, pz))->scenarios.topRows(K)));
          ss.wind = clamp_avail(files[m].wind.at(block_key(day, wz))->scenarios.topRows(K));
          ss.load = clamp_load(files[m].load.at(block_key(day, load_zone))->scenarios.topRows(K));
          cd.scenarios.push_back(std::move(ss));
        }
        days.push_back(std::move(cd));
      }
    }
  }

  value::PlanOptions po;
  po.exact = cfg.str("run.solver") == "exact";
  const value::CampaignResult res =
      value::simulate_campaign(models, days, po, static_cast<int>(cfg.integer("value.threads")));

  std::map<std::string, std::string> meta;
  meta["config"] = cfg.hash;
  std::string joined;
  for (size_t i = 0; i < models.size(); ++i) joined += (i ? "," : "") + models[i];
  meta["models"] = joined;
  meta["scenario_count"] = std::to_string(K);
  meta["solver"] = cfg.str("run.solver");
  meta["oracle_total"] = csv::format_double(res.oracle_total);

  std::vector<std::vector<std::string>> day_rows;
  for (size_t d = 0; d < days.size(); ++d) {
    for (const auto& mo : res.models) {
      day_rows.push_back({days[d].label, mo.model, csv::format_double(mo.daily_profit[d])});
    }
    day_rows.push_back({days[d].label, "oracle", csv::format_double(res.oracle_daily[d])});
  }
  csv::write_file(value_days_path(out), meta, {"label", "model", "profit"}, day_rows);

  std::vector<std::vector<std::string>> camp_rows;
  for (const auto& mo : res.models) {
    for (size_t r = 0; r < mo.rank_count.size(); ++r) {
      camp_rows.push_back({mo.model, csv::format_double(mo.total_profit), std::to_string(r + 1),
                           std::to_string(mo.rank_count[r]),
                           csv::format_double(mo.rank_percent[r])});
    }
  }
  csv::write_file(value_campaign_path(out), meta,
                  {"model", "total_profit", "rank", "count", "cumulative_percent"}, camp_rows);
  std::cout << "eval-value: wrote " << value_campaign_path(out) << " (" << days.size()
            << " trading days x " << models.size() << " models)\n";
}

void emit_plot_data(const std::string& out, dataio::Track track) {
  const std::string cp = quality_curves_path(out, track);
  require_file(cp, "run the eval-quality command first");
  csv::Table tb = csv::read_file(cp);
  const int mc = tb.column("model"), fc = tb.column("family"), gc = tb.column("group"),
            xc = tb.column("x"), yc = tb.column("y");
  if (mc < 0 || fc < 0 || gc < 0 || xc < 0 || yc < 0) {
    throw std::runtime_error(cp + ": expected model, family, group, x, y columns");
  }
  const std::string tn = dataio::track_name(track);
  const size_t width = static_cast<size_t>(std::max({mc, fc, gc, xc, yc})) + 1;

  // family -> model -> rows, preserving file order
  std::map<std::string, std::map<std::string, std::vector<const std::vector<std::string>*>>> by;
  for (const auto& row : tb.rows) {
    if (row.size() < width) throw std::runtime_error(cp + ": short row");
    by[row[fc]][row[mc]].push_back(&row);
  }

  std::map<std::string, std::string> meta = tb.meta;
  for (const auto& [model, rows] : by["reliability"]) {
    std::vector<std::vector<std::string>> rs;
    for (const auto* r : rows) rs.push_back({(*r)[xc], (*r)[yc]});
    csv::write_file(join_path(out, "fig_reliability_" + tn + "_" + model + ".csv"), meta,
                    {"nominal", "observed"}, rs);
  }
  for (const auto& [model, rows] : by["correlation"]) {
    int T = 0;
    for (const auto* r : rows) {
      T = std::max(T, static_cast<int>(csv::to_long((*r)[gc], cp)) + 1);
    }
    Eigen::MatrixXd corr = Eigen::MatrixXd::Zero(T, T);
    for (const auto* r : rows) {
      corr(csv::to_long((*r)[gc], cp), csv::to_long((*r)[xc], cp)) = csv::to_double((*r)[yc], cp);
    }
    std::vector<std::string> header;
    for (int t = 0; t < T; ++t) header.push_back("t_" + std::to_string(t));
    std::vector<std::vector<std::string>> rs;
    for (int r = 0; r < T; ++r) {
      std::vector<std::string> row;
      for (int c = 0; c < T; ++c) row.push_back(csv::format_double(corr(r, c)));
      rs.push_back(std::move(row));
    }
    csv::write_file(join_path(out, "fig_correlation_" + tn + "_" + model + ".csv"), meta, header,
                    rs);
  }
  for (const auto& [model, rows] : by["roc"]) {
    std::vector<std::vector<std::string>> rs;
    for (const auto* r : rows) rs.push_back({(*r)[gc], (*r)[xc], (*r)[yc]});
    csv::write_file(join_path(out, "fig_roc_" + tn + "_" + model + ".csv"), meta,
                    {"classifier", "fpr", "tpr"}, rs);
  }
  // fan quantiles and the observed trajectory share one file per model
  std::set<std::string> fan_models;
  for (const auto& [model, rows] : by["fan"]) fan_models.insert(model);
  for (const auto& model : fan_models) {
    std::vector<std::vector<std::string>> rs;
    for (const auto* r : by["fan"][model]) rs.push_back({"q" + (*r)[gc], (*r)[xc], (*r)[yc]});
    for (const auto* r : by["fan_obs"][model]) rs.push_back({"obs", (*r)[xc], (*r)[yc]});
    csv::write_file(join_path(out, "fig_quantile_fan_" + tn + "_" + model + ".csv"), meta,
                    {"series", "t", "value"}, rs);
  }
  std::vector<std::vector<std::string>> dm_rows;
  for (const std::string fam : {"dm_crps", "dm_es"}) {
    for (const auto& [model, rows] : by[fam]) {
      for (const auto* r : rows) {
        dm_rows.push_back({fam.substr(3), model, (*r)[gc], (*r)[xc], (*r)[yc]});
      }
    }
  }
  if (!dm_rows.empty()) {
    csv::write_file(join_path(out, "fig_dm_" + tn + ".csv"), meta,
                    {"metric", "model_g", "model_h", "statistic", "p_value"}, dm_rows);
  }
}

void cmd_report(const config::Config& cfg) {
  const std::string out = cfg.str("run.out");
  const std::vector<dataio::Track> all = {dataio::Track::wind, dataio::Track::pv,
                                          dataio::Track::load};
  std::vector<dataio::Track> with_quality;
  for (dataio::Track t : all) {
    if (fs::exists(quality_summary_path(out, t))) with_quality.push_back(t);
  }
  const bool with_value = fs::exists(value_campaign_path(out));
  if (with_quality.empty() && !with_value) {
    throw std::runtime_error("nothing to report in " + out + "; expected " +
                             quality_summary_path(out, dataio::Track::load) +
                             " (run eval-quality) or " + value_campaign_path(out) +
                             " (run eval-value)");
  }

  std::map<std::string, std::string> meta;
  meta["config"] = cfg.hash;

  if (!with_quality.empty()) {
    std::vector<std::vector<std::string>> rows;
    for (dataio::Track t : with_quality) {
      csv::Table tb = csv::read_file(quality_summary_path(out, t));
      for (const auto& row : tb.rows) {
        std::vector<std::string> r = {dataio::track_name(t)};
        r.insert(r.end(), row.begin(), row.end());
        rows.push_back(std::move(r));
      }
    }
    csv::write_file(
        table_quality_path(out), meta,
        {"track", "model", "crps_x100", "qs_x100", "es_x100", "vs", "mae_r_pct", "c2st_auc"},
        rows);
    for (dataio::Track t : with_quality) emit_plot_data(out, t);
    std::cout << "report: wrote " << table_quality_path(out) << "\n";
  }
  if (with_value) {
    csv::Table tb = csv::read_file(value_campaign_path(out));
    const int mc = tb.column("model"), tc = tb.column("total_profit"), rc = tb.column("rank"),
              cc = tb.column("count"), pc = tb.column("cumulative_percent");
    if (mc < 0 || tc < 0 || rc < 0 || cc < 0 || pc < 0) {
      throw std::runtime_error(value_campaign_path(out) + ": unexpected columns");
    }
    std::vector<std::vector<std::string>> rows;
    for (const auto& row : tb.rows) {
      const double keur = csv::to_double(row[tc], value_campaign_path(out)) / 1000.0;
      rows.push_back({row[mc], csv::format_double(keur), row[rc], row[cc], row[pc]});
    }
    std::map<std::string, std::string> vmeta = meta;
    auto it = tb.meta.find("oracle_total");
    if (it != tb.meta.end()) {
      vmeta["oracle_total_keur"] = csv::format_double(
          csv::to_double(it->second, value_campaign_path(out)) / 1000.0);
    }
    csv::write_file(table_value_path(out), vmeta,
                    {"model", "total_profit_keur", "rank", "count", "cumulative_percent"}, rows);
    std::cout << "report: wrote " << table_value_path(out) << "\n";
  }
}

void run_command(const std::string& command, const config::Config& cfg) {
  fs::create_directories(cfg.str("run.out"));
  if (command == "ingest") {
    cmd_ingest(cfg);
  } else if (command == "train") {
    cmd_train(cfg);
  } else if (command == "generate") {
    cmd_generate(cfg);
  } else if (command == "eval-quality") {
    cmd_eval_quality(cfg);
  } else if (command == "eval-value") {
    cmd_eval_value(cfg);
  } else if (command == "report") {
    cmd_report(cfg);
  } else {
    throw std::invalid_argument(
        "unknown command '" + command +
        "' (expected ingest, train, generate, eval-quality, eval-value or report)");
  }
}

}  // namespace scengen::pipeline
