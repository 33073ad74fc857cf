#pragma once
// Track data engineering: CSV ingest, feature derivation, splits,
// standardization, and conditioning-vector assembly.
//
// A raw track file carries one row per (day, zone, hour):
//   day,zone,hour,target,<feature columns>
// Wind supplies u10,v10,u100,v100; PV supplies I,T,rh; load supplies w1..w25.
// Files serialized by this module carry derived features, a split column and
// '# key: value' metadata lines, and round-trip bit-exactly.

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace scengen::dataio {

enum class Track { wind, pv, load };
enum class Split { none, ls, vs, ts };

std::string track_name(Track t);
Track track_from_name(const std::string& s);
std::string split_name(Split s);
Split split_from_name(const std::string& s);

struct DayRecord {
  std::string day;          // calendar key, lexicographically sortable
  int zone = 1;             // 1-based
  Eigen::VectorXd target;   // length T, scaled to [0,1] units
  Eigen::MatrixXd weather;  // (n_features x T), derived channels
  Split split = Split::none;
};

struct TrackDataset {
  Track track = Track::load;
  int T = 24;
  int n_zones = 1;
  std::vector<DayRecord> days;                  // sorted by (day, zone)
  std::vector<std::string> feature_names;       // derived channel names
  std::vector<int> removed_periods;             // pv: original hours dropped
  std::vector<double> obs_scale;                // per zone, index zone-1
  bool standardized = false;
  Eigen::VectorXd feat_mean, feat_std;          // per channel, LS statistics
  std::vector<std::string> warnings;            // degenerate-channel notes etc.
  long n_rejected_rows = 0;                     // ingest bookkeeping
  long n_rejected_days = 0;

  int n_features() const { return static_cast<int>(feature_names.size()); }
  std::vector<const DayRecord*> split_days(Split s) const;
  // length of the conditioning vector for this dataset
  int conditioning_dim() const;
};

// Parse a track CSV. Raw files are scaled per zone (max observation over the
// file), features are derived, and PV drops its always-zero periods. Files
// produced by serialize_dataset are restored verbatim instead.
TrackDataset ingest_track(const std::string& path, Track track);

// Canonical on-disk form; ingest_track(serialize_dataset(ds)) == ds bitwise.
void serialize_dataset(const TrackDataset& ds, const std::string& path,
                       const std::string& config_hash = "");

// Expand raw weather channels into model features:
//   wind (u10,v10,u100,v100) -> + ws, we, wd at both heights (10 channels)
//   pv   (I,T,rh)            -> + I^2, I*T                    (5 channels)
//   load (w1..w25)           -> unchanged
Eigen::MatrixXd derive_features(Track track, const Eigen::MatrixXd& raw);
std::vector<std::string> derived_feature_names(Track track,
                                               const std::vector<std::string>& raw_names);

// Tag n_vs + n_ts randomly chosen complete dates (all zones present) as VS and
// TS; every other day goes to LS. Deterministic in the seed.
void split_dataset(TrackDataset& ds, std::uint64_t seed, int n_vs_dates = 50,
                   int n_ts_dates = 50);

// Standardize every weather channel to LS-sample mean 0 / variance 1
// (population statistics). Idempotent; zero-variance channels are centered,
// left unscaled and reported in ds.warnings.
void standardize(TrackDataset& ds);

// Flatten the standardized weather matrix feature-major and append the zone
// one-hot (wind and PV only). Requires standardization.
Eigen::VectorXd conditioning_vector(const TrackDataset& ds, const DayRecord& rec);

}  // namespace scengen::dataio
