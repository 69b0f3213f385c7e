#include "masgcn/archive.h"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "masgcn/kernels.h"

namespace masgcn {

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'M', 'A', 'S', 'G', 'C', 'N', 'F', '1'};
constexpr std::uint32_t kVersion = 1;

class ByteWriter {
 public:
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void i32(std::int32_t v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void ints(std::span<const int> v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (int x : v) i32(x);
  }
  void int_matrix(const IntMat& m) {
    u32(static_cast<std::uint32_t>(m.rows()));
    u32(static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) i32(m(r, c));
    }
  }
  void raw(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
  std::string& bytes() { return buf_; }

 private:
  std::string buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view data) : data_(data) {}

  std::uint32_t u32() { return pod<std::uint32_t>(); }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  std::int32_t i32() { return pod<std::int32_t>(); }
  std::string str() {
    const std::uint32_t n = u32();
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::vector<int> ints() {
    const std::uint32_t n = u32();
    std::vector<int> v(n);
    for (auto& x : v) x = i32();
    return v;
  }
  IntMat int_matrix() {
    const std::uint32_t r = u32(), c = u32();
    IntMat m(r, c);
    for (std::uint32_t i = 0; i < r; ++i) {
      for (std::uint32_t j = 0; j < c; ++j) m(i, j) = i32();
    }
    return m;
  }
  std::string_view take(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw FormatError("feature archive truncated");
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

void write_bundle(ByteWriter& w, const FeatureBundle& b) {
  const TokenizedExample& t = b.tok;
  w.u32(static_cast<std::uint32_t>(t.tokens.size()));
  for (const auto& s : t.tokens) w.str(s);
  w.ints(t.word_ids);
  w.ints(t.pos_ids);
  w.ints(t.rel_positions);
  std::vector<int> mask(t.aspect_mask.begin(), t.aspect_mask.end());
  w.ints(mask);
  w.i32(t.label_id);
  w.ints(t.heads);
  w.ints(t.dep_label_ids);
  w.int_matrix(b.syn.dist);
  w.int_matrix(b.syn.type0);
  w.ints(b.syn.partition_ids);
}

FeatureBundle read_bundle(ByteReader& r, int num_views, int num_types) {
  FeatureBundle b;
  TokenizedExample& t = b.tok;
  const std::uint32_t n = r.u32();
  for (std::uint32_t i = 0; i < n; ++i) t.tokens.push_back(r.str());
  t.word_ids = r.ints();
  t.pos_ids = r.ints();
  t.rel_positions = r.ints();
  for (int m : r.ints()) t.aspect_mask.push_back(static_cast<char>(m));
  t.label_id = r.i32();
  t.heads = r.ints();
  t.dep_label_ids = r.ints();
  b.syn.dist = r.int_matrix();
  b.syn.type0 = r.int_matrix();
  b.syn.partition_ids = r.ints();
  if (t.word_ids.size() != n || b.syn.dist.rows() != n || b.syn.partition_ids.size() != n) {
    throw FormatError("feature archive record has inconsistent lengths");
  }
  b.syn.masks = syntax::build_masks(b.syn.dist, num_views);
  b.syn.partition = syntax::build_partition(b.syn.partition_ids, num_types);
  return b;
}

std::string to_hex(const unsigned char* p, unsigned n) {
  std::ostringstream os;
  for (unsigned i = 0; i < n; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(p[i]);
  return os.str();
}

std::string sha256_raw(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 computation failed");
  }
  return std::string(reinterpret_cast<const char*>(md), len);
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  const std::string d = sha256_raw(bytes);
  return to_hex(reinterpret_cast<const unsigned char*>(d.data()), static_cast<unsigned>(d.size()));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string file_digest(const std::vector<std::filesystem::path>& paths) {
  std::string all;
  for (const auto& p : paths) {
    all += sha256_raw(read_file(p));
  }
  return sha256_hex(all);
}

json ArchiveMeta::to_json() const {
  return json{{"dataset", dataset},       {"num_views", num_views},   {"max_rel_pos", max_rel_pos},
              {"train_path", train_path}, {"test_path", test_path}, {"source_digest", source_digest},
              {"format_version", kVersion}};
}

ArchiveMeta ArchiveMeta::from_json(const json& j) {
  ArchiveMeta m;
  m.dataset = j.at("dataset").get<std::string>();
  m.num_views = j.at("num_views").get<int>();
  m.max_rel_pos = j.at("max_rel_pos").get<int>();
  m.train_path = j.at("train_path").get<std::string>();
  m.test_path = j.at("test_path").get<std::string>();
  m.source_digest = j.at("source_digest").get<std::string>();
  return m;
}

std::string ArchiveMeta::config_hash() const {
  json j{{"dataset", dataset},
         {"num_views", num_views},
         {"max_rel_pos", max_rel_pos},
         {"source_digest", source_digest},
         {"format_version", kVersion}};
  return sha256_hex(j.dump());
}

FeatureBundle make_bundle(const RawExample& ex, const Vocabularies& vocabs, int num_views,
                          int max_rel_pos) {
  FeatureBundle b;
  b.tok = tokenize(ex, vocabs, max_rel_pos);
  b.syn = syntax::compile(b.tok.heads, b.tok.dep_label_ids, num_views, vocabs.dep_type.num_types());
  return b;
}

FeatureArchive build_archive(const ArchiveMeta& meta, const Vocabularies& vocabs,
                             std::span<const RawExample> train, std::span<const RawExample> test) {
  FeatureArchive a;
  a.meta = meta;
  a.vocabs = vocabs;
  a.train = kernels::compile_omp(train, vocabs, meta.num_views, meta.max_rel_pos);
  a.test = kernels::compile_omp(test, vocabs, meta.num_views, meta.max_rel_pos);
  return a;
}

void write_archive(const FeatureArchive& archive, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (VocabKind k : {VocabKind::kWord, VocabKind::kPos, VocabKind::kDepType, VocabKind::kPolarity}) {
    write_file_atomic(dir / (std::string("vocab.") + vocab_kind_name(k) + ".json"),
                      archive.vocabs.get(k).to_json().dump(1) + "\n");
  }

  ByteWriter payload;
  for (const auto* split : {&archive.train, &archive.test}) {
    payload.u32(static_cast<std::uint32_t>(split->size()));
    for (const auto& b : *split) write_bundle(payload, b);
  }
  json header = archive.meta.to_json();
  header["config_hash"] = archive.meta.config_hash();
  header["num_train"] = archive.train.size();
  header["num_test"] = archive.test.size();
  const std::string header_text = header.dump();

  ByteWriter file;
  file.raw(kMagic, sizeof kMagic);
  file.u32(kVersion);
  file.u64(header_text.size());
  file.raw(header_text.data(), header_text.size());
  file.u64(payload.bytes().size());
  file.raw(payload.bytes().data(), payload.bytes().size());
  const std::string digest = sha256_raw(payload.bytes());
  file.raw(digest.data(), digest.size());
  write_file_atomic(dir / "features.bin", file.bytes());
  write_file_atomic(dir / "config_hash.txt", archive.meta.config_hash() + "\n");
}

std::string read_config_hash(const std::filesystem::path& dir) {
  std::string h = read_file(dir / "config_hash.txt");
  while (!h.empty() && (h.back() == '\n' || h.back() == '\r')) h.pop_back();
  return h;
}

FeatureArchive read_archive(const std::filesystem::path& dir) {
  const std::filesystem::path bin = dir / "features.bin";
  if (!std::filesystem::exists(bin)) throw IoError("no feature archive at " + dir.string());
  const std::string data = read_file(bin);
  ByteReader r(data);
  std::string_view magic = r.take(sizeof kMagic);
  if (std::memcmp(magic.data(), kMagic, sizeof kMagic) != 0) throw FormatError("not a feature archive: " + bin.string());
  if (r.u32() != kVersion) throw FormatError("unsupported feature archive version");
  const std::uint64_t header_len = r.u64();
  json header;
  try {
    header = json::parse(r.take(header_len));
  } catch (const json::exception& e) {
    throw FormatError(std::string("feature archive header corrupt: ") + e.what());
  }
  const std::uint64_t payload_len = r.u64();
  std::string_view payload = r.take(payload_len);
  std::string_view stored = r.take(32);
  if (!r.done()) throw FormatError("feature archive has trailing bytes");
  if (sha256_raw(payload) != stored) throw FormatError("feature archive checksum mismatch: " + bin.string());

  FeatureArchive a;
  a.meta = ArchiveMeta::from_json(header);
  if (header.value("config_hash", std::string()) != a.meta.config_hash()) {
    throw FormatError("feature archive header hash mismatch");
  }
  if (std::filesystem::exists(dir / "config_hash.txt") && read_config_hash(dir) != a.meta.config_hash()) {
    throw FormatError("config_hash.txt does not match features.bin");
  }
  auto vocab = [&](VocabKind k) {
    return Vocabulary::from_json(json::parse(read_file(dir / (std::string("vocab.") + vocab_kind_name(k) + ".json"))));
  };
  a.vocabs.word = vocab(VocabKind::kWord);
  a.vocabs.pos = vocab(VocabKind::kPos);
  a.vocabs.dep_type = vocab(VocabKind::kDepType);
  a.vocabs.polarity = vocab(VocabKind::kPolarity);

  ByteReader pr(payload);
  const int u = a.vocabs.dep_type.num_types();
  for (auto* split : {&a.train, &a.test}) {
    const std::uint32_t count = pr.u32();
    split->reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) split->push_back(read_bundle(pr, a.meta.num_views, u));
  }
  if (!pr.done()) throw FormatError("feature archive payload has trailing bytes");
  return a;
}

}  // namespace masgcn
