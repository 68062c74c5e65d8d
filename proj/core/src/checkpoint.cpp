#include "triplesum/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "json.hpp"
#include "triplesum/error.hpp"

namespace triplesum {

namespace {

constexpr char kMagic[8] = {'T', 'S', 'U', 'M', 'C', 'K', 'P', 'T'};

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::ostream& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_bytes(std::istream& in, int n) {
  unsigned char buf[8];
  if (!in.read(reinterpret_cast<char*>(buf), n)) throw CheckpointError("checkpoint truncated");
  std::uint64_t v = 0;
  for (int i = n - 1; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

std::uint32_t get_u32(std::istream& in) { return static_cast<std::uint32_t>(get_bytes(in, 4)); }
std::uint64_t get_u64(std::istream& in) { return get_bytes(in, 8); }

struct Block {
  std::string name;
  nn::Matrix* value = nullptr;
};

std::vector<Block> blocks_of(Triples2Seq& model) {
  std::vector<Block> out;
  for (nn::Parameter* p : model.parameters()) out.push_back({p->name, &p->value});
  for (nn::BatchNorm* bn : model.batch_norms()) {
    const std::string base = bn->scale.name.substr(0, bn->scale.name.rfind('.'));
    out.push_back({base + ".running_mean", &bn->running_mean});
    out.push_back({base + ".running_var", &bn->running_var});
  }
  return out;
}

nlohmann::json meta_to_json(const CheckpointMeta& meta) {
  const ModelConfig& c = meta.model;
  return {{"cell", std::string(to_string(c.cell))},
          {"m", c.m},
          {"layers", c.layers},
          {"e_max", c.e_max},
          {"source_size", c.source_size},
          {"target_size", c.target_size},
          {"sigmoid_candidate", c.sigmoid_candidate},
          {"batch_norm", c.batch_norm},
          {"norm_steps", c.norm_steps},
          {"mode", std::string(to_string(meta.mode))},
          {"e_min", meta.stats.e_min},
          {"e_mean", meta.stats.e_mean},
          {"e_std", meta.stats.e_std},
          {"epoch", meta.epoch},
          {"validation_perplexity", meta.validation_perplexity}};
}

CheckpointMeta meta_from_json(const nlohmann::json& j) {
  CheckpointMeta meta;
  ModelConfig& c = meta.model;
  c.cell = cell_kind_from_string(j.at("cell").get<std::string>());
  c.m = j.at("m").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.e_max = j.at("e_max").get<std::size_t>();
  c.source_size = j.at("source_size").get<std::size_t>();
  c.target_size = j.at("target_size").get<std::size_t>();
  c.sigmoid_candidate = j.at("sigmoid_candidate").get<bool>();
  c.batch_norm = j.at("batch_norm").get<bool>();
  c.norm_steps = j.at("norm_steps").get<std::size_t>();
  meta.mode = summary_mode_from_string(j.at("mode").get<std::string>());
  meta.stats.e_min = j.at("e_min").get<std::size_t>();
  meta.stats.e_mean = j.at("e_mean").get<double>();
  meta.stats.e_std = j.at("e_std").get<double>();
  meta.epoch = j.value("epoch", std::size_t{0});
  meta.validation_perplexity = j.value("validation_perplexity", 0.0);
  return meta;
}

void put_matrix(std::ostream& out, const std::string& name, const double* data, std::uint64_t rows,
                std::uint64_t cols) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_u64(out, rows);
  put_u64(out, cols);
  for (std::uint64_t i = 0; i < rows * cols; ++i) put_u64(out, std::bit_cast<std::uint64_t>(data[i]));
}

}  // namespace

void save_checkpoint(std::ostream& out, Triples2Seq& model, const CheckpointMeta& meta) {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, kCheckpointVersion);
  const std::string header = meta_to_json(meta).dump();
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  put_u64(out, meta.source_hash);
  put_u64(out, meta.target_hash);
  const auto blocks = blocks_of(model);
  put_u64(out, blocks.size());
  for (const Block& b : blocks) {
    put_matrix(out, b.name, b.value->data(), static_cast<std::uint64_t>(b.value->rows()),
               static_cast<std::uint64_t>(b.value->cols()));
  }
  if (!out) throw CheckpointError("failed writing checkpoint");
}

void save_checkpoint(const std::string& path, Triples2Seq& model, const CheckpointMeta& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open " + path + " for writing");
  save_checkpoint(out, model, meta);
}

LoadedCheckpoint load_checkpoint(std::istream& in, const CheckpointExpectations& expect) {
  char magic[sizeof kMagic];
  if (!in.read(magic, sizeof magic)) throw CheckpointError("checkpoint truncated");
  if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw CheckpointError("not a checkpoint file");
  const std::uint32_t version = get_u32(in);
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint version " + std::to_string(version) + ", expected " +
                          std::to_string(kCheckpointVersion));
  const std::uint32_t header_len = get_u32(in);
  if (header_len > (1u << 24)) throw CheckpointError("checkpoint header too large");
  std::string header(header_len, '\0');
  if (!in.read(header.data(), header_len)) throw CheckpointError("checkpoint truncated");

  LoadedCheckpoint out;
  try {
    out.meta = meta_from_json(nlohmann::json::parse(header));
  } catch (const std::exception& e) {
    throw CheckpointError(std::string("checkpoint header unreadable: ") + e.what());
  }
  out.meta.source_hash = get_u64(in);
  out.meta.target_hash = get_u64(in);
  if (expect.cell && *expect.cell != out.meta.model.cell)
    throw CheckpointError("checkpoint holds a " + std::string(to_string(out.meta.model.cell)) + " model, expected " +
                          std::string(to_string(*expect.cell)));
  if (expect.source && expect.source->content_hash() != out.meta.source_hash)
    throw CheckpointError("source vocabulary does not match the checkpoint");
  if (expect.target && expect.target->content_hash() != out.meta.target_hash)
    throw CheckpointError("target vocabulary does not match the checkpoint");

  try {
    out.model = std::make_unique<Triples2Seq>(out.meta.model);
  } catch (const DataError& e) {
    throw CheckpointError(std::string("checkpoint model configuration invalid: ") + e.what());
  }
  std::map<std::string, Block> wanted;
  for (const Block& b : blocks_of(*out.model)) wanted.emplace(b.name, b);

  const std::uint64_t count = get_u64(in);
  if (count != wanted.size())
    throw CheckpointError("checkpoint has " + std::to_string(count) + " blocks, model needs " +
                          std::to_string(wanted.size()));
  for (std::uint64_t k = 0; k < count; ++k) {
    const std::uint32_t name_len = get_u32(in);
    if (name_len > 4096) throw CheckpointError("checkpoint block name too long");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw CheckpointError("checkpoint truncated");
    const std::uint64_t rows = get_u64(in), cols = get_u64(in);
    auto it = wanted.find(name);
    if (it == wanted.end()) throw CheckpointError("unexpected checkpoint block " + name);
    double* data = it->second.value->data();
    const auto want_rows = static_cast<std::uint64_t>(it->second.value->rows());
    const auto want_cols = static_cast<std::uint64_t>(it->second.value->cols());
    if (rows != want_rows || cols != want_cols)
      throw CheckpointError("checkpoint block " + name + " is " + std::to_string(rows) + "x" + std::to_string(cols) +
                            ", model expects " + std::to_string(want_rows) + "x" + std::to_string(want_cols));
    for (std::uint64_t i = 0; i < rows * cols; ++i) data[i] = std::bit_cast<double>(get_u64(in));
    wanted.erase(it);
  }
  if (in.peek() != std::char_traits<char>::eof()) throw CheckpointError("trailing bytes after checkpoint");
  return out;
}

LoadedCheckpoint load_checkpoint(const std::string& path, const CheckpointExpectations& expect) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  return load_checkpoint(in, expect);
}

}  // namespace triplesum
