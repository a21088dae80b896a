#pragma once

#include <algorithm>
#include <cctype>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cgdpd {

enum class Label { True, False, Unknown };

enum class BinaryAnswer { Yes, No };

inline constexpr Label kAllLabels[] = {Label::True, Label::False, Label::Unknown};

constexpr std::string_view to_string(Label y) noexcept {
  switch (y) {
    case Label::True: return "True";
    case Label::False: return "False";
    case Label::Unknown: return "Unknown";
  }
  return "Unknown";
}

constexpr std::string_view to_string(BinaryAnswer b) noexcept { return b == BinaryAnswer::Yes ? "Yes" : "No"; }

constexpr char short_name(Label y) noexcept {
  switch (y) {
    case Label::True: return 'T';
    case Label::False: return 'F';
    case Label::Unknown: return 'U';
  }
  return 'U';
}

constexpr bool is_decisive(Label y) noexcept { return y != Label::Unknown; }

constexpr std::size_t index_of(Label y) noexcept { return static_cast<std::size_t>(y); }

// The label map induced by negating the hypothesis.
constexpr Label neg_map(Label y) noexcept {
  switch (y) {
    case Label::True: return Label::False;
    case Label::False: return Label::True;
    case Label::Unknown: return Label::Unknown;
  }
  return Label::Unknown;
}

// y(not H) == neg_map(y(H)).
constexpr bool pair_consistent(Label y_h, Label y_neg_h) noexcept { return y_neg_h == neg_map(y_h); }

// Exact serialized forms only ("True", "False", "Unknown").
inline std::optional<Label> label_from_string(std::string_view s) noexcept {
  for (const Label y : kAllLabels)
    if (s == to_string(y)) return y;
  return std::nullopt;
}

inline std::optional<BinaryAnswer> answer_from_string(std::string_view s) noexcept {
  if (s == "Yes") return BinaryAnswer::Yes;
  if (s == "No") return BinaryAnswer::No;
  return std::nullopt;
}

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace cgdpd
