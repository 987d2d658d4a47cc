#include "latticeformer/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "latticeformer/error.hpp"

namespace latticeformer {

namespace {

constexpr const char* kFormat = "latticeformer-checkpoint";

template <typename U>
void put_le(std::string& out, U bits) {
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    out.push_back(static_cast<char>((bits >> (8 * b)) & 0xFF));
  }
}

template <typename U>
U get_le(const std::string& in, std::size_t offset) {
  U bits = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    bits |= static_cast<U>(static_cast<unsigned char>(in[offset + b])) << (8 * b);
  }
  return bits;
}

template <typename T>
constexpr const char* precision_name() {
  return sizeof(T) == 4 ? "f32" : "f64";
}

}  // namespace

template <typename T>
void save_checkpoint(const ParamStore<T>& params, const std::filesystem::path& path) {
  nlohmann::ordered_json header;
  header["format"] = kFormat;
  header["version"] = 1;
  header["tensors"] = nlohmann::ordered_json::array();
  std::string data;
  for (const auto& p : params) {
    nlohmann::ordered_json entry;
    entry["name"] = p.name;
    entry["shape"] = p.value.shape();
    entry["precision"] = precision_name<T>();
    entry["offset"] = data.size();
    header["tensors"].push_back(std::move(entry));
    for (T v : p.value.values()) {
      if constexpr (sizeof(T) == 4) {
        put_le(data, std::bit_cast<std::uint32_t>(v));
      } else {
        put_le(data, std::bit_cast<std::uint64_t>(v));
      }
    }
  }
  const std::string text = header.dump();
  std::string out;
  put_le(out, static_cast<std::uint64_t>(text.size()));
  out += text;
  out += data;

  std::ofstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
}

template <typename T>
void load_checkpoint(ParamStore<T>& params, const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw InputError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(file)), std::istreambuf_iterator<char>());
  if (bytes.size() < 8) throw InputError(path.string() + ": truncated checkpoint");
  const auto header_size = get_le<std::uint64_t>(bytes, 0);
  if (bytes.size() < 8 + header_size) throw InputError(path.string() + ": truncated header");

  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(8, header_size));
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": bad checkpoint header: " + e.what());
  }
  if (header.value("format", "") != kFormat) throw InputError(path.string() + ": not a checkpoint");
  const std::size_t data_start = 8 + header_size;

  for (auto& p : params) {
    const nlohmann::json* entry = nullptr;
    for (const auto& t : header.at("tensors")) {
      if (t.at("name") == p.name) entry = &t;
    }
    if (entry == nullptr) throw InputError(path.string() + ": missing tensor " + p.name);
    if (entry->at("shape").get<std::vector<std::size_t>>() != p.value.shape()) {
      throw InputError(path.string() + ": shape mismatch for " + p.name);
    }
    const std::string precision = entry->at("precision").get<std::string>();
    const std::size_t width = precision == "f32" ? 4 : precision == "f64" ? 8 : 0;
    if (width == 0) throw InputError(path.string() + ": unknown precision " + precision);
    const std::size_t offset = data_start + entry->at("offset").get<std::size_t>();
    if (bytes.size() < offset + width * p.value.size()) {
      throw InputError(path.string() + ": truncated data for " + p.name);
    }
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const std::size_t at = offset + i * width;
      if (width == 4) {
        p.value[i] = static_cast<T>(std::bit_cast<float>(get_le<std::uint32_t>(bytes, at)));
      } else {
        p.value[i] = static_cast<T>(std::bit_cast<double>(get_le<std::uint64_t>(bytes, at)));
      }
    }
  }
}

template void save_checkpoint<float>(const ParamStore<float>&, const std::filesystem::path&);
template void save_checkpoint<double>(const ParamStore<double>&, const std::filesystem::path&);
template void load_checkpoint<float>(ParamStore<float>&, const std::filesystem::path&);
template void load_checkpoint<double>(ParamStore<double>&, const std::filesystem::path&);

}  // namespace latticeformer
