#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "umjoin/core/relation.hpp"

namespace umjoin::harness {

enum class KeyDistribution { kUniform, kZipf };

struct StreamSpec {
  std::string name;
  std::string key_field = "k";
  std::string id_field = "id";
  std::size_t tuple_count = 1000;
  std::uint64_t key_domain = 50;
  KeyDistribution distribution = KeyDistribution::kUniform;
  double zipf_s = 1.2;
  std::size_t payload_bytes = 16;  // 0 drops the payload column
};

struct GenSpec {
  std::vector<StreamSpec> streams;
  std::uint64_t seed = 42;
};

// `streams` tables t0..t{n-1}, all keyed on `k`.
GenSpec star_spec(std::size_t streams, std::size_t rows, std::uint64_t keys, std::uint64_t seed);
// The four returns/customer tables of the address-key star query.
GenSpec tpcds4_spec(std::size_t rows, std::uint64_t keys, std::uint64_t seed);

// Tables of `key:int, id:int[, pad:str]`; deterministic for a fixed spec.
// Each stream draws from its own generator seeded from (seed, stream position).
std::vector<Table> generate(const GenSpec& spec);

// Writes `<name>.csv` per stream and `manifest.json` with per-stream counts.
void write_dataset(const GenSpec& spec, const std::vector<Table>& tables, const std::filesystem::path& dir);

}  // namespace umjoin::harness
