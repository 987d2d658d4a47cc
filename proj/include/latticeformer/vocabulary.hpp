#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace latticeformer {

inline constexpr std::string_view kUnkToken = "<unk>";
inline constexpr std::string_view kBosToken = "<s>";
inline constexpr std::string_view kEosToken = "</s>";

class Vocabulary {
 public:
  Vocabulary() = default;

  // Specials first (in the given order), then every token seen at least
  // `min_count` times, sorted.
  static Vocabulary build(const std::map<std::string, std::size_t>& counts, std::size_t min_count,
                          const std::vector<std::string>& specials);

  std::size_t add(const std::string& token);
  std::optional<std::size_t> find(std::string_view token) const;
  // Falls back to <unk> when present; otherwise throws InputError.
  std::size_t id(std::string_view token) const;
  const std::string& token(std::size_t id) const { return tokens_.at(id); }
  std::size_t size() const noexcept { return tokens_.size(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

  std::string to_json() const;
  static Vocabulary from_json(std::string_view json);

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace latticeformer
