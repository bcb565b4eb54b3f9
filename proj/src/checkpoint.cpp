#include "checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "error.hpp"

static_assert(std::endian::native == std::endian::little,
              "checkpoint payload is written as raw little-endian doubles");

namespace abslab {

using nlohmann::json;

void save_checkpoint(const std::string& path, const std::vector<NamedTensor>& tensors,
                     const std::string& extra_json) {
  json header;
  header["tensors"] = json::array();
  std::size_t offset = 0;
  for (const NamedTensor& nt : tensors) {
    json entry;
    entry["name"] = nt.name;
    entry["shape"] = nt.tensor.shape();
    entry["offset"] = offset;
    header["tensors"].push_back(entry);
    offset += nt.tensor.size();
  }
  header["extra"] = json::parse(extra_json);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  out << header.dump() << "\n";
  for (const NamedTensor& nt : tensors) {
    out.write(reinterpret_cast<const char*>(nt.tensor.value().data()),
              static_cast<std::streamsize>(nt.tensor.size() * sizeof(double)));
  }
  if (!out) throw IoError("failed writing checkpoint payload: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint: " + path);
  std::string header_line;
  if (!std::getline(in, header_line)) throw DataError("checkpoint has no header: " + path);

  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::exception& e) {
    throw DataError("checkpoint header is not valid JSON (" + path + "): " + e.what());
  }

  std::vector<char> payload(std::istreambuf_iterator<char>(in), {});
  if (payload.size() % sizeof(double) != 0)
    throw DataError("checkpoint payload is not a whole number of doubles: " + path);
  const std::size_t total = payload.size() / sizeof(double);

  Checkpoint ckpt;
  ckpt.extra_json = header.value("extra", json::object()).dump();
  for (const json& entry : header.at("tensors")) {
    NamedTensor nt;
    nt.name = entry.at("name").get<std::string>();
    const auto shape = entry.at("shape").get<std::vector<std::size_t>>();
    const auto offset = entry.at("offset").get<std::size_t>();
    const std::size_t count = shape_size(shape);
    if (offset + count > total)
      throw DataError("checkpoint tensor '" + nt.name + "' overruns payload: " + path);
    std::vector<double> values(count);
    std::memcpy(values.data(), payload.data() + offset * sizeof(double),
                count * sizeof(double));
    nt.tensor = Tensor::from(shape, std::move(values));
    ckpt.tensors.push_back(std::move(nt));
  }
  return ckpt;
}

const Tensor* Checkpoint::find(const std::string& name) const {
  for (const NamedTensor& nt : tensors)
    if (nt.name == name) return &nt.tensor;
  return nullptr;
}

void restore_parameters(const Checkpoint& ckpt, std::vector<NamedTensor>& params) {
  for (NamedTensor& p : params) {
    const Tensor* src = ckpt.find(p.name);
    if (src == nullptr) throw DataError("checkpoint is missing tensor '" + p.name + "'");
    if (src->shape() != p.tensor.shape())
      throw DataError("checkpoint tensor '" + p.name + "' has shape " +
                      shape_str(src->shape()) + ", expected " + shape_str(p.tensor.shape()));
    p.tensor.value() = src->value();
  }
}

}  // namespace abslab
