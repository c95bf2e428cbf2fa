#pragma once

// Deterministic synthetic perimeter-firewall logs for tests, the acceptance
// suite and demos. Inside hosts live in 10.0.0.0/8.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

namespace firelog::testing {

struct SyntheticLogOptions {
  std::size_t rows = 1000;
  std::uint64_t seed = 1;
  std::size_t inside_hosts = 40;
  std::size_t outside_hosts = 200;
  // Rows with extreme bytes/duration/port appended at random positions.
  std::size_t outliers = 0;
};

inline constexpr const char* kSyntheticHeader =
    "timestamp,source-ip,destination-ip,action,protocol,dst_port,bytes,duration,rule";

inline std::string synthetic_firewall_csv(const SyntheticLogOptions& opt,
                                          std::vector<std::size_t>* outlier_rows = nullptr) {
  std::mt19937_64 rng(opt.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::lognormal_distribution<double> bytes_dist(7.0, 1.0);
  std::exponential_distribution<double> dur_dist(0.5);
  std::uniform_int_distribution<int> high_port(1024, 65535);

  auto inside_ip = [&](std::size_t i) {
    return "10.32." + std::to_string(i / 250) + "." + std::to_string(1 + i % 250);
  };
  auto outside_ip = [&](std::size_t i) {
    return std::to_string(45 + (i * 7) % 150) + "." + std::to_string((i * 13) % 256) + "." +
           std::to_string((i * 31) % 256) + "." + std::to_string(1 + i % 254);
  };
  const int ports[] = {80, 443, 22, 53, 25, 8080};

  std::vector<std::size_t> outlier_pos;
  {
    std::uniform_int_distribution<std::size_t> pos(0, opt.rows + opt.outliers - 1);
    while (outlier_pos.size() < opt.outliers) {
      const auto p = pos(rng);
      bool dup = false;
      for (auto q : outlier_pos) dup = dup || q == p;
      if (!dup) outlier_pos.push_back(p);
    }
  }

  std::string out = std::string(kSyntheticHeader) + "\n";
  std::int64_t t_ms = 1333645200000;  // 2012-04-05T17:00:00Z
  const std::size_t total = opt.rows + opt.outliers;
  for (std::size_t r = 0; r < total; ++r) {
    bool is_outlier = false;
    for (auto q : outlier_pos) is_outlier = is_outlier || q == r;
    // Mostly increasing timestamps with occasional interleaving.
    t_ms += static_cast<std::int64_t>(u01(rng) * 2000.0);
    const std::int64_t ts = u01(rng) < 0.05 ? t_ms - 1500 : t_ms;
    const std::size_t in = static_cast<std::size_t>(u01(rng) * static_cast<double>(opt.inside_hosts));
    const std::size_t outh =
        static_cast<std::size_t>(u01(rng) * static_cast<double>(opt.outside_hosts));
    const bool inbound = u01(rng) < 0.6;
    const std::string src = inbound ? outside_ip(outh) : inside_ip(in);
    const std::string dst = inbound ? inside_ip(in) : outside_ip(outh);
    const double a = u01(rng);
    std::string action = a < 0.7 ? "accept" : a < 0.95 ? "deny" : "drop";
    const double p = u01(rng);
    std::string proto = p < 0.8 ? "tcp" : p < 0.98 ? "udp" : "icmp";
    int port = u01(rng) < 0.85 ? ports[static_cast<int>(u01(rng) * 6) % 6] : high_port(rng);
    long long bytes = static_cast<long long>(std::llround(bytes_dist(rng)));
    double duration = std::round(dur_dist(rng) * 1000.0) / 1000.0;
    std::string rule = u01(rng) < 0.3 ? "rule-" + std::to_string(1 + static_cast<int>(u01(rng) * 9)) : "";
    if (is_outlier) {
      if (outlier_rows) outlier_rows->push_back(r);
      bytes = 2000000000LL + static_cast<long long>(u01(rng) * 1e8);
      duration = 50000.0 + std::round(u01(rng) * 1000.0);
      port = 31337;
    }
    const std::int64_t secs = ts / 1000;
    const std::int64_t ms = ts % 1000;
    const std::int64_t days = secs / 86400;
    const std::int64_t sod = secs % 86400;
    // Days since 1970-01-01 to civil date (proleptic Gregorian).
    std::int64_t z = days + 719468;
    const std::int64_t era = z / 146097;
    const std::int64_t doe = z - era * 146097;
    const std::int64_t yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    std::int64_t y = yoe + era * 400;
    const std::int64_t doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const std::int64_t mp = (5 * doy + 2) / 153;
    const std::int64_t d = doy - (153 * mp + 2) / 5 + 1;
    const std::int64_t m = mp < 10 ? mp + 3 : mp - 9;
    if (m <= 2) ++y;
    char tsbuf[128];
    std::snprintf(tsbuf, sizeof tsbuf, "%04lld-%02lld-%02lldT%02lld:%02lld:%02lld.%03lldZ",
                  static_cast<long long>(y), static_cast<long long>(m), static_cast<long long>(d),
                  static_cast<long long>(sod / 3600), static_cast<long long>(sod / 60 % 60),
                  static_cast<long long>(sod % 60), static_cast<long long>(ms));
    char durbuf[32];
    std::snprintf(durbuf, sizeof durbuf, "%.3f", duration);
    out += std::string(tsbuf) + "," + src + "," + dst + "," + action + "," + proto + "," +
           std::to_string(port) + "," + std::to_string(bytes) + "," + durbuf + "," + rule + "\n";
  }
  return out;
}

}  // namespace firelog::testing
