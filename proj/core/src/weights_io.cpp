#include "fusionnet/weights_io.hpp"

#include <limits>

namespace fusionnet {

Bytes write_weights(const std::vector<NamedTensor>& tensors) {
  Bytes out{'F', 'N', 'W', '1'};
  for (const auto& t : tensors) {
    if (shape_size(t.shape) != t.values.size()) {
      fail(ErrorKind::shape, "tensor '" + t.name + "' values do not match its shape");
    }
    put_u32le(out, static_cast<std::uint32_t>(t.name.size()));
    out.insert(out.end(), t.name.begin(), t.name.end());
    put_u32le(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) {
      if (d > std::numeric_limits<std::uint32_t>::max()) fail(ErrorKind::shape, "dimension exceeds 32 bits");
      put_u32le(out, static_cast<std::uint32_t>(d));
    }
    for (float v : t.values) put_f32le(out, v);
  }
  return out;
}

std::vector<NamedTensor> read_weights(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || bytes[0] != 'F' || bytes[1] != 'N' || bytes[2] != 'W' || bytes[3] != '1') {
    fail(ErrorKind::format, "weights file has bad magic");
  }
  std::vector<NamedTensor> out;
  std::size_t pos = 4;
  auto need = [&](std::size_t n) {
    if (bytes.size() - pos < n) fail(ErrorKind::format, "weights file truncated");
  };
  while (pos < bytes.size()) {
    NamedTensor t;
    need(4);
    const std::uint32_t name_len = get_u32le(bytes, pos);
    pos += 4;
    need(name_len);
    t.name.assign(reinterpret_cast<const char*>(bytes.data() + pos), name_len);
    pos += name_len;
    need(4);
    const std::uint32_t rank = get_u32le(bytes, pos);
    pos += 4;
    if (rank > 8) fail(ErrorKind::format, "tensor '" + t.name + "' has implausible rank");
    need(4 * static_cast<std::size_t>(rank));
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      t.shape.push_back(get_u32le(bytes, pos));
      pos += 4;
      count *= t.shape.back();
    }
    if (count > (bytes.size() - pos) / 4) fail(ErrorKind::format, "weights file truncated in '" + t.name + "'");
    t.values.resize(count);
    for (std::size_t i = 0; i < count; ++i, pos += 4) t.values[i] = get_f32le(bytes, pos);
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace fusionnet
