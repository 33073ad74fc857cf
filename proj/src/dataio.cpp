#include "scengen/dataio.hpp"

#include "scengen/csv.hpp"
#include "scengen/nn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace scengen::dataio {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::string> wind_raw_names() { return {"u10", "v10", "u100", "v100"}; }
std::vector<std::string> pv_raw_names() { return {"I", "T", "rh"}; }
std::vector<std::string> load_raw_names() {
  std::vector<std::string> n;
  for (int i = 1; i <= 25; ++i) n.push_back("w" + std::to_string(i));
  return n;
}

std::vector<std::string> raw_names(Track t) {
  switch (t) {
    case Track::wind:
      return wind_raw_names();
    case Track::pv:
      return pv_raw_names();
    case Track::load:
      return load_raw_names();
  }
  throw std::logic_error("unknown track");
}

bool contains_all(const std::vector<std::string>& header, const std::vector<std::string>& names) {
  for (const auto& n : names)
    if (std::find(header.begin(), header.end(), n) == header.end()) return false;
  return true;
}

std::string join_doubles(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += csv::format_double(v[i]);
  }
  return s;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += csv::format_double(v[i]);
  }
  return s;
}

std::vector<double> parse_double_list(const std::string& s, const std::string& ctx) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (const auto& cell : csv::split_line(s)) out.push_back(csv::to_double(cell, ctx));
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& ctx) {
  std::vector<int> out;
  if (s.empty()) return out;
  for (const auto& cell : csv::split_line(s)) out.push_back(static_cast<int>(csv::to_long(cell, ctx)));
  return out;
}

}  // namespace

std::string track_name(Track t) {
  switch (t) {
    case Track::wind:
      return "wind";
    case Track::pv:
      return "pv";
    case Track::load:
      return "load";
  }
  throw std::logic_error("unknown track");
}

Track track_from_name(const std::string& s) {
  if (s == "wind") return Track::wind;
  if (s == "pv") return Track::pv;
  if (s == "load") return Track::load;
  throw std::invalid_argument("unknown track name: " + s);
}

std::string split_name(Split s) {
  switch (s) {
    case Split::none:
      return "none";
    case Split::ls:
      return "ls";
    case Split::vs:
      return "vs";
    case Split::ts:
      return "ts";
  }
  throw std::logic_error("unknown split");
}

Split split_from_name(const std::string& s) {
  if (s == "none") return Split::none;
  if (s == "ls") return Split::ls;
  if (s == "vs") return Split::vs;
  if (s == "ts") return Split::ts;
  throw std::invalid_argument("unknown split name: " + s);
}

std::vector<const DayRecord*> TrackDataset::split_days(Split s) const {
  std::vector<const DayRecord*> out;
  for (const auto& d : days)
    if (d.split == s) out.push_back(&d);
  return out;
}

int TrackDataset::conditioning_dim() const {
  return n_features() * T + (track == Track::load ? 0 : n_zones);
}

std::vector<std::string> derived_feature_names(Track track,
                                               const std::vector<std::string>& raw) {
  switch (track) {
    case Track::wind:
      return {"u10", "v10", "u100", "v100", "ws10", "ws100", "we10", "we100", "wd10", "wd100"};
    case Track::pv:
      return {"I", "T", "rh", "I2", "IT"};
    case Track::load:
      return raw;
  }
  throw std::logic_error("unknown track");
}

Eigen::MatrixXd derive_features(Track track, const Eigen::MatrixXd& raw) {
  const Eigen::Index T = raw.cols();
  switch (track) {
    case Track::wind: {
      if (raw.rows() != 4) throw std::invalid_argument("wind raw features must have 4 channels");
      Eigen::MatrixXd out(10, T);
      out.topRows(4) = raw;
      for (Eigen::Index t = 0; t < T; ++t) {
        const double u10 = raw(0, t), v10 = raw(1, t), u100 = raw(2, t), v100 = raw(3, t);
        const double ws10 = std::hypot(u10, v10);
        const double ws100 = std::hypot(u100, v100);
        out(4, t) = ws10;
        out(5, t) = ws100;
        out(6, t) = 0.5 * ws10 * ws10 * ws10;   // specific energy
        out(7, t) = 0.5 * ws100 * ws100 * ws100;
        out(8, t) = 180.0 / kPi * std::atan2(u10, v10);  // direction in degrees
        out(9, t) = 180.0 / kPi * std::atan2(u100, v100);
      }
      return out;
    }
    case Track::pv: {
      if (raw.rows() != 3) throw std::invalid_argument("pv raw features must have 3 channels");
      Eigen::MatrixXd out(5, T);
      out.topRows(3) = raw;
      out.row(3) = raw.row(0).cwiseProduct(raw.row(0));  // I^2
      out.row(4) = raw.row(0).cwiseProduct(raw.row(1));  // I*T
      return out;
    }
    case Track::load:
      if (raw.rows() != 25) throw std::invalid_argument("load features must have 25 channels");
      return raw;
  }
  throw std::logic_error("unknown track");
}

namespace {

TrackDataset restore_canonical(const csv::Table& t, Track track, const std::string& path) {
  TrackDataset ds;
  ds.track = track;
  const std::string stored = t.meta.at("track");
  if (stored != track_name(track))
    throw std::runtime_error("schema error: file " + path + " holds track '" + stored +
                             "', expected '" + track_name(track) + "'");
  ds.T = static_cast<int>(csv::to_long(t.meta.at("T"), path + " meta T"));
  ds.n_zones = static_cast<int>(csv::to_long(t.meta.at("n_zones"), path + " meta n_zones"));
  ds.standardized = t.meta.count("standardized") && t.meta.at("standardized") == "1";
  if (t.meta.count("removed_hours"))
    ds.removed_periods = parse_int_list(t.meta.at("removed_hours"), path);
  if (t.meta.count("obs_scale")) ds.obs_scale = parse_double_list(t.meta.at("obs_scale"), path);
  if (t.meta.count("feat_mean")) {
    auto m = parse_double_list(t.meta.at("feat_mean"), path);
    auto s = parse_double_list(t.meta.at("feat_std"), path);
    ds.feat_mean = Eigen::Map<Eigen::VectorXd>(m.data(), m.size());
    ds.feat_std = Eigen::Map<Eigen::VectorXd>(s.data(), s.size());
  }

  const int c_day = t.column("day"), c_zone = t.column("zone"), c_hour = t.column("hour");
  const int c_split = t.column("split"), c_target = t.column("target");
  if (c_day < 0 || c_zone < 0 || c_hour < 0 || c_split < 0 || c_target < 0)
    throw std::runtime_error("schema error: canonical dataset missing fixed columns in " + path);
  for (std::size_t i = c_target + 1; i < t.header.size(); ++i)
    ds.feature_names.push_back(t.header[i]);
  const int n_f = ds.n_features();

  std::map<std::pair<std::string, int>, DayRecord> recs;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string ctx = path + " row " + std::to_string(r + 2);
    if (row.size() != t.header.size()) throw std::runtime_error("schema error: ragged row at " + ctx);
    const std::string day = row[c_day];
    const int zone = static_cast<int>(csv::to_long(row[c_zone], ctx));
    const int hour = static_cast<int>(csv::to_long(row[c_hour], ctx));
    if (hour < 0 || hour >= ds.T) throw std::runtime_error("schema error: hour out of range at " + ctx);
    auto& rec = recs[{day, zone}];
    if (rec.target.size() == 0) {
      rec.day = day;
      rec.zone = zone;
      rec.target = Eigen::VectorXd::Constant(ds.T, std::nan(""));
      rec.weather = Eigen::MatrixXd::Zero(n_f, ds.T);
      rec.split = split_from_name(row[c_split]);
    }
    rec.target[hour] = csv::to_double(row[c_target], ctx);
    for (int f = 0; f < n_f; ++f)
      rec.weather(f, hour) = csv::to_double(row[c_target + 1 + f], ctx);
  }
  for (auto& [key, rec] : recs) {
    if (rec.target.hasNaN())
      throw std::runtime_error("schema error: day " + key.first + " zone " +
                               std::to_string(key.second) + " incomplete in " + path);
    ds.days.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace

TrackDataset ingest_track(const std::string& path, Track track) {
  csv::Table t = csv::read_file(path);
  if (t.rows.empty()) throw std::runtime_error("schema error: no data rows in " + path);
  if (t.meta.count("track")) return restore_canonical(t, track, path);

  const int c_day = t.column("day"), c_zone = t.column("zone"), c_hour = t.column("hour");
  const int c_target = t.column("target");
  if (c_day < 0 || c_zone < 0 || c_hour < 0 || c_target < 0)
    throw std::runtime_error("schema error: required columns day,zone,hour,target missing in " +
                             path);

  // feature columns are everything beyond the fixed four, matched by name
  std::vector<std::string> feat_cols;
  for (std::size_t i = 0; i < t.header.size(); ++i) {
    const int idx = static_cast<int>(i);
    if (idx == c_day || idx == c_zone || idx == c_hour || idx == c_target) continue;
    feat_cols.push_back(t.header[i]);
  }
  const auto raw = raw_names(track);
  const auto derived = derived_feature_names(track, raw);
  bool pre_derived;
  if (contains_all(feat_cols, derived) && feat_cols.size() == derived.size())
    pre_derived = true;
  else if (contains_all(feat_cols, raw) && feat_cols.size() == raw.size())
    pre_derived = false;
  else {
    std::string want;
    for (const auto& n : raw) want += n + " ";
    throw std::runtime_error("schema error: " + track_name(track) +
                             " track needs feature columns " + want + "in " + path);
  }
  const auto& names = pre_derived ? derived : raw;
  std::vector<int> feat_idx;
  for (const auto& n : names) feat_idx.push_back(t.column(n));

  TrackDataset ds;
  ds.track = track;
  const int T_raw = 24;
  ds.T = T_raw;

  struct RawDay {
    Eigen::VectorXd target = Eigen::VectorXd::Constant(24, std::nan(""));
    Eigen::MatrixXd feat;
    int n_hours = 0;
  };
  std::map<std::pair<std::string, int>, RawDay> recs;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    const std::string ctx = path + " row " + std::to_string(r + 2);
    if (row.size() != t.header.size()) throw std::runtime_error("schema error: ragged row at " + ctx);
    const std::string day = row[c_day];
    int zone, hour;
    Eigen::VectorXd vals(names.size());
    double target;
    try {
      zone = static_cast<int>(csv::to_long(row[c_zone], ctx));
      hour = static_cast<int>(csv::to_long(row[c_hour], ctx));
      target = csv::to_double(row[c_target], ctx);
      for (std::size_t f = 0; f < feat_idx.size(); ++f)
        vals[f] = csv::to_double(row[feat_idx[f]], ctx);
    } catch (const std::runtime_error&) {
      ++ds.n_rejected_rows;
      continue;
    }
    if (!std::isfinite(target) || !vals.allFinite()) {
      ++ds.n_rejected_rows;
      continue;
    }
    if (zone < 1) throw std::runtime_error("schema error: zone must be >= 1 at " + ctx);
    if (hour < 0 || hour >= T_raw)
      throw std::runtime_error("schema error: hour out of [0,24) at " + ctx);
    auto& rec = recs[{day, zone}];
    if (rec.feat.size() == 0) rec.feat = Eigen::MatrixXd::Zero(names.size(), T_raw);
    if (!std::isnan(rec.target[hour]))
      throw std::runtime_error("schema error: duplicate (day,zone,hour) at " + ctx);
    rec.target[hour] = target;
    rec.feat.col(hour) = vals;
    ++rec.n_hours;
  }

  int max_zone = 0;
  for (auto& [key, raw_day] : recs) {
    if (raw_day.n_hours < T_raw) {
      ++ds.n_rejected_days;
      continue;
    }
    DayRecord rec;
    rec.day = key.first;
    rec.zone = key.second;
    rec.target = raw_day.target;
    rec.weather = pre_derived ? raw_day.feat : derive_features(track, raw_day.feat);
    ds.days.push_back(std::move(rec));
    max_zone = std::max(max_zone, key.second);
  }
  if (ds.days.empty()) throw std::runtime_error("schema error: no complete days in " + path);
  ds.n_zones = max_zone;
  ds.feature_names = derived;

  // per-zone observation scaling to [0,1]
  ds.obs_scale.assign(ds.n_zones, 0.0);
  for (const auto& d : ds.days)
    ds.obs_scale[d.zone - 1] = std::max(ds.obs_scale[d.zone - 1], d.target.maxCoeff());
  for (int z = 0; z < ds.n_zones; ++z) {
    if (ds.obs_scale[z] <= 0.0) {
      ds.obs_scale[z] = 1.0;
      ds.warnings.push_back("zone " + std::to_string(z + 1) +
                            " has non-positive peak observation; left unscaled");
    }
  }
  for (auto& d : ds.days) d.target /= ds.obs_scale[d.zone - 1];

  // PV: drop periods that are zero across the whole file
  if (track == Track::pv) {
    std::vector<bool> always_zero(T_raw, true);
    for (const auto& d : ds.days)
      for (int h = 0; h < T_raw; ++h)
        if (d.target[h] != 0.0) always_zero[h] = false;
    std::vector<int> keep;
    for (int h = 0; h < T_raw; ++h) {
      if (always_zero[h])
        ds.removed_periods.push_back(h);
      else
        keep.push_back(h);
    }
    if (keep.empty()) throw std::runtime_error("schema error: pv observations all zero in " + path);
    if (!ds.removed_periods.empty()) {
      ds.T = static_cast<int>(keep.size());
      for (auto& d : ds.days) {
        Eigen::VectorXd tgt(ds.T);
        Eigen::MatrixXd wx(ds.n_features(), ds.T);
        for (int i = 0; i < ds.T; ++i) {
          tgt[i] = d.target[keep[i]];
          wx.col(i) = d.weather.col(keep[i]);
        }
        d.target = tgt;
        d.weather = wx;
      }
    }
  }

  std::sort(ds.days.begin(), ds.days.end(), [](const DayRecord& a, const DayRecord& b) {
    return std::tie(a.day, a.zone) < std::tie(b.day, b.zone);
  });
  return ds;
}

void serialize_dataset(const TrackDataset& ds, const std::string& path,
                       const std::string& config_hash) {
  std::map<std::string, std::string> meta;
  meta["track"] = track_name(ds.track);
  meta["T"] = std::to_string(ds.T);
  meta["n_zones"] = std::to_string(ds.n_zones);
  meta["standardized"] = ds.standardized ? "1" : "0";
  if (!ds.removed_periods.empty()) {
    std::string s;
    for (std::size_t i = 0; i < ds.removed_periods.size(); ++i)
      s += (i ? "," : "") + std::to_string(ds.removed_periods[i]);
    meta["removed_hours"] = s;
  }
  if (!ds.obs_scale.empty()) meta["obs_scale"] = join_doubles(ds.obs_scale);
  if (ds.feat_mean.size() > 0) {
    meta["feat_mean"] = join_doubles(ds.feat_mean);
    meta["feat_std"] = join_doubles(ds.feat_std);
  }
  if (!config_hash.empty()) meta["config_hash"] = config_hash;

  std::vector<std::string> header = {"day", "zone", "hour", "split", "target"};
  header.insert(header.end(), ds.feature_names.begin(), ds.feature_names.end());
  std::vector<std::vector<std::string>> rows;
  rows.reserve(ds.days.size() * ds.T);
  for (const auto& d : ds.days)
    for (int h = 0; h < ds.T; ++h) {
      std::vector<std::string> row = {d.day, std::to_string(d.zone), std::to_string(h),
                                      split_name(d.split), csv::format_double(d.target[h])};
      for (int f = 0; f < ds.n_features(); ++f)
        row.push_back(csv::format_double(d.weather(f, h)));
      rows.push_back(std::move(row));
    }
  csv::write_file(path, meta, header, rows);
}

void split_dataset(TrackDataset& ds, std::uint64_t seed, int n_vs_dates, int n_ts_dates) {
  std::map<std::string, int> zone_count;
  for (const auto& d : ds.days) ++zone_count[d.day];
  std::vector<std::string> complete;
  for (const auto& [day, cnt] : zone_count)
    if (cnt == ds.n_zones) complete.push_back(day);
  std::sort(complete.begin(), complete.end());
  if (static_cast<int>(complete.size()) < n_vs_dates + n_ts_dates + 1)
    throw std::runtime_error("split_dataset: need at least " +
                             std::to_string(n_vs_dates + n_ts_dates + 1) +
                             " complete dates, have " + std::to_string(complete.size()));

  nn::Rng rng(seed);
  rng.shuffle(complete);
  std::set<std::string> vs(complete.begin(), complete.begin() + n_vs_dates);
  std::set<std::string> ts(complete.begin() + n_vs_dates,
                           complete.begin() + n_vs_dates + n_ts_dates);
  for (auto& d : ds.days) {
    if (vs.count(d.day))
      d.split = Split::vs;
    else if (ts.count(d.day))
      d.split = Split::ts;
    else
      d.split = Split::ls;
  }
}

void standardize(TrackDataset& ds) {
  const auto ls = ds.split_days(Split::ls);
  if (ls.empty()) throw std::runtime_error("standardize: no learning-set days (run split first)");
  const int n_f = ds.n_features();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n_f), var = Eigen::VectorXd::Zero(n_f);
  const double n = static_cast<double>(ls.size() * ds.T);
  for (const auto* d : ls) mean += d->weather.rowwise().sum();
  mean /= n;
  for (const auto* d : ls)
    var += (d->weather.colwise() - mean).cwiseAbs2().rowwise().sum();
  var /= n;  // population variance

  Eigen::VectorXd scale(n_f);
  for (int f = 0; f < n_f; ++f) {
    const double sd = std::sqrt(var[f]);
    if (sd < 1e-12) {
      scale[f] = 1.0;
      ds.warnings.push_back("feature channel '" + ds.feature_names[f] +
                            "' has zero variance on the learning set");
    } else {
      scale[f] = sd;
    }
  }
  for (auto& d : ds.days)
    d.weather = scale.cwiseInverse().asDiagonal() * (d.weather.colwise() - mean);

  if (ds.standardized) {
    // compose with the transform already applied
    ds.feat_mean += ds.feat_std.cwiseProduct(mean);
    ds.feat_std = ds.feat_std.cwiseProduct(scale);
  } else {
    ds.feat_mean = mean;
    ds.feat_std = scale;
    ds.standardized = true;
  }
}

Eigen::VectorXd conditioning_vector(const TrackDataset& ds, const DayRecord& rec) {
  if (!ds.standardized)
    throw std::logic_error("conditioning_vector: dataset must be standardized first");
  if (rec.zone < 1 || rec.zone > ds.n_zones)
    throw std::invalid_argument("conditioning_vector: zone " + std::to_string(rec.zone) +
                                " outside [1," + std::to_string(ds.n_zones) + "]");
  const int n_f = ds.n_features();
  Eigen::VectorXd c(ds.conditioning_dim());
  int k = 0;
  for (int f = 0; f < n_f; ++f)
    for (int t = 0; t < ds.T; ++t) c[k++] = rec.weather(f, t);
  if (ds.track != Track::load) {
    for (int z = 1; z <= ds.n_zones; ++z) c[k++] = (z == rec.zone) ? 1.0 : 0.0;
  }
  return c;
}

}  // namespace scengen::dataio
