#pragma once

// Feature cache: vocabularies plus per-sentence tokenized inputs and
// syntactic tensors, written as a directory
//   vocab.{word,pos,dep_type,polarity}.json, features.bin, config_hash.txt
// features.bin = magic, version, JSON header, binary payload, SHA-256 of
// the payload. Masks and one-hot partitions are rebuilt on load from the
// stored distances and partition ids.

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "masgcn/corpus.h"
#include "masgcn/syntax.h"

namespace masgcn {

struct FeatureBundle {
  TokenizedExample tok;
  syntax::SyntacticFeatures syn;
};

FeatureBundle make_bundle(const RawExample& ex, const Vocabularies& vocabs, int num_views,
                          int max_rel_pos);

struct ArchiveMeta {
  std::string dataset;
  int num_views = 10;
  int max_rel_pos = 40;
  std::string train_path;
  std::string test_path;
  // SHA-256 over the raw dataset bytes.
  std::string source_digest;

  nlohmann::json to_json() const;
  static ArchiveMeta from_json(const nlohmann::json& j);
  // Hash over every field that changes the cached features.
  std::string config_hash() const;
};

struct FeatureArchive {
  ArchiveMeta meta;
  Vocabularies vocabs;
  std::vector<FeatureBundle> train;
  std::vector<FeatureBundle> test;

  const std::vector<FeatureBundle>& split(Split s) const { return s == Split::kTrain ? train : test; }
};

std::string sha256_hex(const std::string& bytes);
std::string file_digest(const std::vector<std::filesystem::path>& paths);

// Builds bundles for both splits (vocabularies must come from train).
FeatureArchive build_archive(const ArchiveMeta& meta, const Vocabularies& vocabs,
                             std::span<const RawExample> train, std::span<const RawExample> test);

// Deterministic: identical inputs produce byte-identical files.
void write_archive(const FeatureArchive& archive, const std::filesystem::path& dir);

// Throws IoError / FormatError ("checksum mismatch") on a missing or corrupt
// archive.
FeatureArchive read_archive(const std::filesystem::path& dir);

// Stored hash of an archive directory, without reading the payload.
std::string read_config_hash(const std::filesystem::path& dir);

// Atomic write via temp file + rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

}  // namespace masgcn
