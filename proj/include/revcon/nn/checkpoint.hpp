// Checkpoint directory layout shared by both models:
//   manifest.json  model-specific metadata (kind, class/aspect order, config)
//   vocab.json     tokenizer vocabulary
//   weights.bin    named f64 tensors, magic "RVCNWTS1"
// Weights are written and read in full double precision, so a reload
// reproduces bit-identical predictions.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "revcon/errors.hpp"
#include "revcon/nn/graph.hpp"

namespace revcon::nn {

inline constexpr char kWeightsMagic[9] = "RVCNWTS1";

inline void save_weights(const std::filesystem::path& file,
                         const std::vector<Parameter*>& params) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw ModelError("cannot write: " + file.string());
  out.write(kWeightsMagic, 8);
  const std::uint64_t count = params.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof count);
  for (const Parameter* p : params) {
    const std::uint32_t name_len = static_cast<std::uint32_t>(p->name.size());
    out.write(reinterpret_cast<const char*>(&name_len), sizeof name_len);
    out.write(p->name.data(), name_len);
    const std::uint64_t rows = static_cast<std::uint64_t>(p->value.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(p->value.cols());
    out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    for (Eigen::Index i = 0; i < p->value.rows(); ++i)
      for (Eigen::Index j = 0; j < p->value.cols(); ++j) {
        const double v = p->value(i, j);
        out.write(reinterpret_cast<const char*>(&v), sizeof v);
      }
  }
}

// Fills the given parameters by name; every parameter must be present with
// matching shape and no stored tensor may be left over.
inline void load_weights(const std::filesystem::path& file,
                         const std::vector<Parameter*>& params) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IncompatibleCheckpoint("missing weights file: " + file.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != std::string(kWeightsMagic, 8))
    throw IncompatibleCheckpoint("bad weights magic");
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof count);

  std::map<std::string, Parameter*> by_name;
  for (Parameter* p : params) by_name[p->name] = p;
  std::size_t filled = 0;
  for (std::uint64_t k = 0; k < count; ++k) {
    std::uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof name_len);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), sizeof rows);
    in.read(reinterpret_cast<char*>(&cols), sizeof cols);
    if (!in) throw IncompatibleCheckpoint("truncated weights file");
    auto it = by_name.find(name);
    if (it == by_name.end()) throw IncompatibleCheckpoint("unexpected tensor: " + name);
    Parameter* p = it->second;
    if (p->value.rows() != static_cast<Eigen::Index>(rows) ||
        p->value.cols() != static_cast<Eigen::Index>(cols))
      throw IncompatibleCheckpoint("shape mismatch for tensor: " + name);
    for (std::uint64_t i = 0; i < rows; ++i)
      for (std::uint64_t j = 0; j < cols; ++j) {
        double v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof v);
        p->value(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      }
    ++filled;
  }
  if (!in) throw IncompatibleCheckpoint("truncated weights file");
  if (filled != by_name.size())
    throw IncompatibleCheckpoint("weights file is missing tensors");
}

inline void write_json_file(const std::filesystem::path& file, const nlohmann::ordered_json& j) {
  std::ofstream out(file);
  if (!out) throw ModelError("cannot write: " + file.string());
  out << j.dump(2) << "\n";
}

inline nlohmann::json read_json_file(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IncompatibleCheckpoint("missing file: " + file.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw IncompatibleCheckpoint("invalid JSON: " + file.string());
  return j;
}

}  // namespace revcon::nn
