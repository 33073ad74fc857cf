#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "scengen/csv.hpp"
#include "scengen/dataio.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

using namespace scengen;
namespace fs = std::filesystem;

namespace {

fs::path test_dir() {
  fs::path p = fs::temp_directory_path() / "scengen_dataio_test";
  fs::create_directories(p);
  return p;
}

// deterministic synthetic raw wind file
std::string write_wind_csv(int n_days, int n_zones, const std::string& name) {
  fs::path p = test_dir() / name;
  std::ofstream out(p);
  out << "day,zone,hour,target,u10,v10,u100,v100\n";
  for (int d = 0; d < n_days; ++d)
    for (int z = 1; z <= n_zones; ++z)
      for (int h = 0; h < 24; ++h) {
        const double u = 0.1 * ((d + h) % 7) - 0.3;
        const double v = 0.2 * ((d + z + h) % 5) - 0.4;
        const double power = 0.5 + 0.4 * std::sin(0.3 * h + 0.1 * d + z);
        char day[16];
        std::snprintf(day, sizeof(day), "d%04d", d);
        out << day << "," << z << "," << h << "," << power << "," << u << "," << v << ","
            << (u + 0.05) << "," << (v + 0.05) << "\n";
      }
  return p.string();
}

std::string write_pv_csv(int n_days, int n_zones, const std::string& name) {
  fs::path p = test_dir() / name;
  std::ofstream out(p);
  out << "day,zone,hour,target,I,T,rh\n";
  for (int d = 0; d < n_days; ++d)
    for (int z = 1; z <= n_zones; ++z)
      for (int h = 0; h < 24; ++h) {
        // nighttime hours 0-3 and 20-23 never produce
        const bool night = h < 4 || h >= 20;
        const double irr = night ? 0.0 : std::sin((h - 4) * 3.14159 / 16.0);
        const double power = night ? 0.0 : 0.8 * irr + 0.01 * z;
        char day[16];
        std::snprintf(day, sizeof(day), "d%04d", d);
        out << day << "," << z << "," << h << "," << power << "," << irr << ","
            << (15.0 + h * 0.3) << "," << (0.6 - 0.01 * h) << "\n";
      }
  return p.string();
}

std::string write_load_csv(int n_days, const std::string& name) {
  fs::path p = test_dir() / name;
  std::ofstream out(p);
  out << "day,zone,hour,target";
  for (int i = 1; i <= 25; ++i) out << ",w" << i;
  out << "\n";
  for (int d = 0; d < n_days; ++d)
    for (int h = 0; h < 24; ++h) {
      char day[16];
      std::snprintf(day, sizeof(day), "d%04d", d);
      out << day << ",1," << h << "," << (50.0 + 10.0 * std::sin(0.26 * h) + 0.2 * d);
      for (int i = 1; i <= 25; ++i) out << "," << (10.0 + std::sin(0.1 * (d + h + i)));
      out << "\n";
    }
  return p.string();
}

}  // namespace

TEST_CASE("wind feature derivation matches hand arithmetic") {
  Eigen::MatrixXd raw(4, 1);
  raw << 3.0, 4.0, 3.0, 4.0;  // u10=3, v10=4
  Eigen::MatrixXd out = dataio::derive_features(dataio::Track::wind, raw);
  REQUIRE(out.rows() == 10);
  CHECK(out(4, 0) == doctest::Approx(5.0).epsilon(1e-14));            // ws = hypot(3,4)
  CHECK(out(6, 0) == doctest::Approx(62.5).epsilon(1e-14));           // we = 0.5*5^3
  CHECK(out(8, 0) == doctest::Approx(36.86989764584402).epsilon(1e-12));  // atan2(3,4) in degrees
}

TEST_CASE("pv feature derivation appends I^2 and I*T") {
  Eigen::MatrixXd raw(3, 2);
  raw << 2.0, 3.0, 10.0, 20.0, 0.5, 0.6;
  Eigen::MatrixXd out = dataio::derive_features(dataio::Track::pv, raw);
  REQUIRE(out.rows() == 5);
  CHECK(out(3, 0) == doctest::Approx(4.0));
  CHECK(out(3, 1) == doctest::Approx(9.0));
  CHECK(out(4, 0) == doctest::Approx(20.0));
  CHECK(out(4, 1) == doctest::Approx(60.0));
}

TEST_CASE("ingest scales observations per zone and keeps them in [0,1]") {
  auto path = write_wind_csv(6, 2, "wind_small.csv");
  auto ds = dataio::ingest_track(path, dataio::Track::wind);
  CHECK(ds.n_zones == 2);
  CHECK(ds.T == 24);
  CHECK(ds.days.size() == 12);
  CHECK(ds.n_features() == 10);
  double peak = 0.0;
  for (const auto& d : ds.days) {
    CHECK(d.target.minCoeff() >= 0.0);
    CHECK(d.target.maxCoeff() <= 1.0 + 1e-12);
    peak = std::max(peak, d.target.maxCoeff());
  }
  CHECK(peak == doctest::Approx(1.0));  // some observation sits at the zone peak
}

TEST_CASE("pv ingest drops always-zero periods and records their indices") {
  auto path = write_pv_csv(5, 3, "pv_small.csv");
  auto ds = dataio::ingest_track(path, dataio::Track::pv);
  CHECK(ds.T == 16);
  REQUIRE(ds.removed_periods.size() == 8);
  std::vector<int> expect = {0, 1, 2, 3, 20, 21, 22, 23};
  CHECK(ds.removed_periods == expect);
  for (const auto& d : ds.days) CHECK(d.target.size() == 16);
}

TEST_CASE("ingest rejects malformed inputs loudly") {
  fs::path p = test_dir() / "bad.csv";
  {
    std::ofstream out(p);
    out << "day,zone,hour,u10,v10,u100,v100\n";  // target column missing
    out << "d0,1,0,1,2,3,4\n";
  }
  CHECK_THROWS_WITH_AS(dataio::ingest_track(p.string(), dataio::Track::wind),
                       doctest::Contains("schema error"), std::runtime_error);

  fs::path empty = test_dir() / "empty.csv";
  std::ofstream(empty.string()).close();
  CHECK_THROWS_AS(dataio::ingest_track(empty.string(), dataio::Track::wind), std::runtime_error);

  CHECK_THROWS_AS(dataio::ingest_track((test_dir() / "nope.csv").string(), dataio::Track::wind),
                  std::runtime_error);
}

TEST_CASE("rows with bad numerics are rejected and counted, incomplete days dropped") {
  auto path = write_wind_csv(4, 1, "wind_nan.csv");
  {
    std::ofstream out(path, std::ios::app);
    // day d0099 gets a single corrupt row -> row rejected -> day incomplete
    for (int h = 0; h < 24; ++h)
      out << "d0099,1," << h << "," << (h == 3 ? "not_a_number" : "0.5") << ",0.1,0.2,0.3,0.4\n";
  }
  auto ds = dataio::ingest_track(path, dataio::Track::wind);
  CHECK(ds.n_rejected_rows == 1);
  CHECK(ds.n_rejected_days == 1);
  CHECK(ds.days.size() == 4);
}

TEST_CASE("split tags exact date counts, disjoint, deterministic in the seed") {
  auto path = write_wind_csv(30, 2, "wind_split.csv");
  auto ds = dataio::ingest_track(path, dataio::Track::wind);
  dataio::split_dataset(ds, 42, 5, 5);
  auto vs = ds.split_days(dataio::Split::vs);
  auto ts = ds.split_days(dataio::Split::ts);
  auto ls = ds.split_days(dataio::Split::ls);
  CHECK(vs.size() == 10);  // 5 dates x 2 zones
  CHECK(ts.size() == 10);
  CHECK(ls.size() == 40);

  std::set<std::string> vs_dates, ts_dates;
  for (auto* d : vs) vs_dates.insert(d->day);
  for (auto* d : ts) ts_dates.insert(d->day);
  for (const auto& d : vs_dates) CHECK(ts_dates.count(d) == 0);

  auto ds2 = dataio::ingest_track(path, dataio::Track::wind);
  dataio::split_dataset(ds2, 42, 5, 5);
  for (std::size_t i = 0; i < ds.days.size(); ++i) CHECK(ds.days[i].split == ds2.days[i].split);

  auto ds3 = dataio::ingest_track(path, dataio::Track::wind);
  dataio::split_dataset(ds3, 43, 5, 5);
  bool any_diff = false;
  for (std::size_t i = 0; i < ds.days.size(); ++i)
    if (ds.days[i].split != ds3.days[i].split) any_diff = true;
  CHECK(any_diff);

  CHECK_THROWS_AS(dataio::split_dataset(ds, 1, 20, 20), std::runtime_error);
}

TEST_CASE("standardization gives LS channels zero mean unit variance and is idempotent") {
  auto path = write_wind_csv(30, 1, "wind_std.csv");
  auto ds = dataio::ingest_track(path, dataio::Track::wind);
  dataio::split_dataset(ds, 7, 5, 5);
  dataio::standardize(ds);
  CHECK(ds.standardized);

  auto ls = ds.split_days(dataio::Split::ls);
  const int n_f = ds.n_features();
  for (int f = 0; f < n_f; ++f) {
    double mean = 0.0, var = 0.0;
    const double n = static_cast<double>(ls.size() * ds.T);
    for (auto* d : ls) mean += d->weather.row(f).sum();
    mean /= n;
    for (auto* d : ls) var += (d->weather.row(f).array() - mean).square().sum();
    var /= n;
    CHECK(std::abs(mean) < 1e-10);
    CHECK(var == doctest::Approx(1.0).epsilon(1e-8));
  }

  // idempotence: a second call must not move the values
  Eigen::MatrixXd before = ds.days[0].weather;
  Eigen::VectorXd mean0 = ds.feat_mean, std0 = ds.feat_std;
  dataio::standardize(ds);
  CHECK((ds.days[0].weather - before).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((ds.feat_mean - mean0).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("two-value channel standardizes to plus and minus one") {
  // degenerate dataset exercising the population-std convention
  fs::path p = test_dir() / "load_twoval.csv";
  {
    std::ofstream out(p);
    out << "day,zone,hour,target";
    for (int i = 1; i <= 25; ++i) out << ",w" << i;
    out << "\n";
    for (int d = 0; d < 4; ++d)
      for (int h = 0; h < 24; ++h) {
        out << "d" << d << ",1," << h << ",1.0";
        // channel w1 alternates between 1 and 3; others constant
        out << "," << ((h % 2 == 0) ? 1.0 : 3.0);
        for (int i = 2; i <= 25; ++i) out << ",5.0";
        out << "\n";
      }
  }
  auto ds = dataio::ingest_track(p.string(), dataio::Track::load);
  dataio::split_dataset(ds, 1, 1, 1);
  dataio::standardize(ds);
  for (const auto& d : ds.days)
    for (int t = 0; t < ds.T; ++t)
      CHECK(std::abs(std::abs(d.weather(0, t)) - 1.0) < 1e-12);
  // constant channels are centered, unscaled, and flagged
  CHECK(!ds.warnings.empty());
  CHECK(std::abs(ds.days[0].weather(5, 0)) < 1e-12);
}

TEST_CASE("conditioning vector lengths match the track layouts") {
  auto wind = dataio::ingest_track(write_wind_csv(15, 10, "wind_c.csv"), dataio::Track::wind);
  dataio::split_dataset(wind, 3, 2, 2);
  dataio::standardize(wind);
  CHECK(wind.conditioning_dim() == 250);  // 10*24 + 10
  Eigen::VectorXd c = dataio::conditioning_vector(wind, wind.days[0]);
  CHECK(c.size() == 250);
  // one-hot tail
  double tail = c.tail(10).sum();
  CHECK(tail == doctest::Approx(1.0));
  CHECK(c.tail(10)(wind.days[0].zone - 1) == doctest::Approx(1.0));

  auto pv = dataio::ingest_track(write_pv_csv(15, 3, "pv_c.csv"), dataio::Track::pv);
  dataio::split_dataset(pv, 3, 2, 2);
  dataio::standardize(pv);
  CHECK(pv.conditioning_dim() == 83);  // 5*16 + 3
  CHECK(dataio::conditioning_vector(pv, pv.days[0]).size() == 83);

  auto load = dataio::ingest_track(write_load_csv(15, "load_c.csv"), dataio::Track::load);
  dataio::split_dataset(load, 3, 2, 2);
  dataio::standardize(load);
  CHECK(load.conditioning_dim() == 600);  // 25*24, no one-hot
  CHECK(dataio::conditioning_vector(load, load.days[0]).size() == 600);

  // feature-major layout: entry f*T+t equals weather(f,t)
  const auto& rec = *load.split_days(dataio::Split::ls)[0];
  Eigen::VectorXd cv = dataio::conditioning_vector(load, rec);
  CHECK(cv[2 * 24 + 5] == doctest::Approx(rec.weather(2, 5)));

  dataio::DayRecord bad = load.days[0];
  bad.zone = 99;
  CHECK_THROWS_AS(dataio::conditioning_vector(load, bad), std::invalid_argument);
}

TEST_CASE("serialize then ingest round-trips the dataset bitwise") {
  auto path = write_pv_csv(12, 2, "pv_rt.csv");
  auto ds = dataio::ingest_track(path, dataio::Track::pv);
  dataio::split_dataset(ds, 9, 3, 3);
  dataio::standardize(ds);

  fs::path out = test_dir() / "pv_canonical.csv";
  dataio::serialize_dataset(ds, out.string(), "cfg123");
  auto ds2 = dataio::ingest_track(out.string(), dataio::Track::pv);

  CHECK(ds2.T == ds.T);
  CHECK(ds2.n_zones == ds.n_zones);
  CHECK(ds2.removed_periods == ds.removed_periods);
  CHECK(ds2.standardized == ds.standardized);
  CHECK(ds2.obs_scale == ds.obs_scale);
  REQUIRE(ds2.days.size() == ds.days.size());
  for (std::size_t i = 0; i < ds.days.size(); ++i) {
    CHECK(ds2.days[i].day == ds.days[i].day);
    CHECK(ds2.days[i].zone == ds.days[i].zone);
    CHECK(ds2.days[i].split == ds.days[i].split);
    CHECK((ds2.days[i].target - ds.days[i].target).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ds2.days[i].weather - ds.days[i].weather).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK((ds2.feat_mean - ds.feat_mean).cwiseAbs().maxCoeff() == 0.0);

  // wrong-track restore refuses
  CHECK_THROWS_AS(dataio::ingest_track(out.string(), dataio::Track::wind), std::runtime_error);
}
