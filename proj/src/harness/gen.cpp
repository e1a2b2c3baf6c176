#include "umjoin/harness/gen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"
#include "umjoin/core/error.hpp"
#include "umjoin/harness/csv.hpp"

namespace umjoin::harness {

namespace {

double unit_double(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r = 0;
  do {
    r = rng();
  } while (r >= limit);
  return r % bound;
}

void validate(const StreamSpec& s) {
  if (s.name.empty()) throw ConfigError("stream without a name");
  if (s.key_domain == 0) throw ConfigError("stream '" + s.name + "': key domain must be positive");
  if (s.distribution == KeyDistribution::kZipf && !(s.zipf_s > 0)) {
    throw ConfigError("stream '" + s.name + "': zipf exponent must be positive");
  }
  if (s.key_field == s.id_field) throw ConfigError("stream '" + s.name + "': key and id fields share a name");
}

}  // namespace

GenSpec star_spec(std::size_t streams, std::size_t rows, std::uint64_t keys, std::uint64_t seed) {
  GenSpec spec;
  spec.seed = seed;
  for (std::size_t i = 0; i < streams; ++i) {
    StreamSpec s;
    s.name = "t" + std::to_string(i);
    s.tuple_count = rows;
    s.key_domain = keys;
    spec.streams.push_back(s);
  }
  return spec;
}

GenSpec tpcds4_spec(std::size_t rows, std::uint64_t keys, std::uint64_t seed) {
  GenSpec spec;
  spec.seed = seed;
  const struct {
    const char* name;
    const char* key;
    const char* id;
  } tables[] = {{"store_returns", "sr_addr_sk", "sr_ticket_number"},
                {"customer", "c_current_addr_sk", "c_customer_sk"},
                {"web_returns", "wr_refunded_addr_sk", "wr_order_number"},
                {"catalog_returns", "cr_refunded_addr_sk", "cr_order_number"}};
  for (const auto& t : tables) {
    StreamSpec s;
    s.name = t.name;
    s.key_field = t.key;
    s.id_field = t.id;
    s.tuple_count = rows;
    s.key_domain = keys;
    spec.streams.push_back(s);
  }
  return spec;
}

std::vector<Table> generate(const GenSpec& spec) {
  std::vector<Table> out;
  for (std::size_t si = 0; si < spec.streams.size(); ++si) {
    const auto& s = spec.streams[si];
    validate(s);
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(si)};
    std::mt19937_64 rng(seq);

    std::vector<double> cdf;
    if (s.distribution == KeyDistribution::kZipf) {
      cdf.resize(s.key_domain);
      double sum = 0;
      for (std::uint64_t r = 0; r < s.key_domain; ++r) {
        sum += 1.0 / std::pow(static_cast<double>(r + 1), s.zipf_s);
        cdf[r] = sum;
      }
      for (auto& c : cdf) c /= sum;
    }

    Table t;
    t.name = s.name;
    t.schema.fields.push_back({s.key_field, FieldType::kInt});
    t.schema.fields.push_back({s.id_field, FieldType::kInt});
    if (s.payload_bytes > 0) t.schema.fields.push_back({"pad", FieldType::kString});
    t.rows.reserve(s.tuple_count);
    for (std::size_t i = 0; i < s.tuple_count; ++i) {
      std::int64_t key = 0;
      if (s.distribution == KeyDistribution::kUniform) {
        key = static_cast<std::int64_t>(bounded(rng, s.key_domain));
      } else {
        const double u = unit_double(rng);
        key = static_cast<std::int64_t>(std::min<std::size_t>(
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin(), cdf.size() - 1));
      }
      Row row{Value{key}, Value{static_cast<std::int64_t>(i)}};
      if (s.payload_bytes > 0) {
        std::string pad(s.payload_bytes, 'a');
        for (auto& c : pad) c = static_cast<char>('a' + bounded(rng, 26));
        row.push_back(Value{std::move(pad)});
      }
      t.rows.push_back(std::move(row));
    }
    out.push_back(std::move(t));
  }
  return out;
}

void write_dataset(const GenSpec& spec, const std::vector<Table>& tables, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json streams = nlohmann::json::array();
  for (std::size_t i = 0; i < tables.size(); ++i) {
    const auto& s = spec.streams.at(i);
    write_csv_table(tables[i], dir / (tables[i].name + ".csv"));
    streams.push_back({{"name", s.name},
                       {"file", tables[i].name + ".csv"},
                       {"tuple_count", tables[i].rows.size()},
                       {"key_field", s.key_field},
                       {"key_domain", s.key_domain},
                       {"distribution", s.distribution == KeyDistribution::kUniform ? "uniform" : "zipf"},
                       {"zipf_s", s.zipf_s},
                       {"payload_bytes", s.payload_bytes}});
  }
  nlohmann::json manifest{{"seed", spec.seed}, {"streams", std::move(streams)}};
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace umjoin::harness
