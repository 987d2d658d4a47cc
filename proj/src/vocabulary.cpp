#include "latticeformer/vocabulary.hpp"

#include <json.hpp>

#include "latticeformer/error.hpp"

namespace latticeformer {

Vocabulary Vocabulary::build(const std::map<std::string, std::size_t>& counts,
                             std::size_t min_count, const std::vector<std::string>& specials) {
  Vocabulary vocab;
  for (const auto& s : specials) vocab.add(s);
  for (const auto& [token, count] : counts) {
    if (count >= min_count) vocab.add(token);
  }
  return vocab;
}

std::size_t Vocabulary::add(const std::string& token) {
  auto it = index_.find(token);
  if (it != index_.end()) return it->second;
  index_.emplace(token, tokens_.size());
  tokens_.push_back(token);
  return tokens_.size() - 1;
}

std::optional<std::size_t> Vocabulary::find(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::id(std::string_view token) const {
  if (auto found = find(token)) return *found;
  if (auto unk = find(kUnkToken)) return *unk;
  throw InputError("token '" + std::string(token) + "' is not in the vocabulary and no " +
                   std::string(kUnkToken) + " is configured");
}

std::string Vocabulary::to_json() const { return nlohmann::json(tokens_).dump(); }

Vocabulary Vocabulary::from_json(std::string_view json) {
  Vocabulary vocab;
  try {
    for (const auto& t : nlohmann::json::parse(json).get<std::vector<std::string>>()) vocab.add(t);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed vocabulary JSON: ") + e.what());
  }
  return vocab;
}

}  // namespace latticeformer
