#include "canvascot/geometry.hpp"

#include <charconv>
#include <cmath>
#include <string>

namespace canvascot {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Length of the longest number prefix of `s` (0 if none). Grammar as in
// parse_decimal, without surrounding whitespace.
std::size_t scan_number(std::string_view s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  std::size_t int_digits = 0;
  while (i < s.size() && is_digit(s[i])) ++i, ++int_digits;
  std::size_t frac_digits = 0;
  if (i < s.size() && s[i] == '.') {
    std::size_t j = i + 1;
    while (j < s.size() && is_digit(s[j])) ++j, ++frac_digits;
    if (int_digits == 0 && frac_digits == 0) return 0;
    i = j;
  }
  if (int_digits == 0 && frac_digits == 0) return 0;
  if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
    std::size_t j = i + 1;
    if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
    std::size_t exp_digits = 0;
    while (j < s.size() && is_digit(s[j])) ++j, ++exp_digits;
    if (exp_digits > 0) i = j;
  }
  return i;
}

std::optional<double> convert(std::string_view token) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  if (!std::isfinite(value)) return std::nullopt;
  return value;
}

class NumberReader {
 public:
  explicit NumberReader(std::string_view s) : s_(s) {}

  void skip_separators() {
    while (pos_ < s_.size() && (is_space(s_[pos_]) || s_[pos_] == ',')) ++pos_;
  }
  bool at_end() {
    skip_separators();
    return pos_ >= s_.size();
  }
  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void advance() { ++pos_; }

  std::optional<double> number() {
    skip_separators();
    std::size_t n = scan_number(s_.substr(pos_));
    if (n == 0) return std::nullopt;
    auto v = convert(s_.substr(pos_, n));
    if (v) pos_ += n;
    return v;
  }

  std::optional<double> flag() {
    skip_separators();
    if (pos_ < s_.size() && (s_[pos_] == '0' || s_[pos_] == '1')) return double(s_[pos_++] - '0');
    return std::nullopt;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

int arg_count(char op) {
  switch (op) {
    case 'M': case 'm': case 'L': case 'l': case 'T': case 't': return 2;
    case 'H': case 'h': case 'V': case 'v': return 1;
    case 'C': case 'c': return 6;
    case 'S': case 's': case 'Q': case 'q': return 4;
    case 'A': case 'a': return 7;
    case 'Z': case 'z': return 0;
    default: return -1;
  }
}

}  // namespace

std::optional<double> parse_decimal(std::string_view text) {
  while (!text.empty() && is_space(text.front())) text.remove_prefix(1);
  while (!text.empty() && is_space(text.back())) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;
  if (scan_number(text) != text.size()) return std::nullopt;
  return convert(text);
}

std::optional<std::vector<PathCommand>> parse_path_data(std::string_view text) {
  NumberReader in(text);
  std::vector<PathCommand> out;
  char current = 0;
  while (!in.at_end()) {
    char c = in.peek();
    bool explicit_op = arg_count(c) >= 0;
    if (explicit_op) {
      in.advance();
      current = c;
    } else if (current == 0 || current == 'Z' || current == 'z') {
      return std::nullopt;
    }
    if (out.empty() && current != 'M' && current != 'm') return std::nullopt;

    int n = arg_count(current);
    PathCommand cmd{current, {}};
    for (int k = 0; k < n; ++k) {
      std::optional<double> v =
          ((current == 'A' || current == 'a') && (k == 3 || k == 4)) ? in.flag() : in.number();
      if (!v) return std::nullopt;
      cmd.args.push_back(*v);
    }
    out.push_back(std::move(cmd));
    // Implicit repeats after a moveto are linetos.
    if (current == 'M') current = 'L';
    else if (current == 'm') current = 'l';
  }
  if (out.empty()) return std::nullopt;
  return out;
}

std::optional<std::vector<double>> parse_number_list(std::string_view text) {
  NumberReader in(text);
  std::vector<double> out;
  while (!in.at_end()) {
    auto v = in.number();
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

std::optional<std::vector<Point>> parse_point_list(std::string_view text) {
  auto nums = parse_number_list(text);
  if (!nums || nums->empty() || nums->size() % 2 != 0) return std::nullopt;
  std::vector<Point> pts;
  for (std::size_t i = 0; i < nums->size(); i += 2) pts.push_back({(*nums)[i], (*nums)[i + 1]});
  return pts;
}

Affine Affine::then_after(const Affine& o) const {
  return {a * o.a + c * o.b,     b * o.a + d * o.b,     a * o.c + c * o.d,
          b * o.c + d * o.d,     a * o.e + c * o.f + e, b * o.e + d * o.f + f};
}

double Affine::scale_factor() const { return std::sqrt(std::abs(a * d - b * c)); }

std::optional<Affine> parse_transform(std::string_view text) {
  Affine result;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && (is_space(text[i]) || text[i] == ',')) ++i;
  };
  skip();
  while (i < text.size()) {
    std::size_t start = i;
    while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
    std::string_view name = text.substr(start, i - start);
    while (i < text.size() && is_space(text[i])) ++i;
    if (i >= text.size() || text[i] != '(') return std::nullopt;
    std::size_t close = text.find(')', i);
    if (close == std::string_view::npos) return std::nullopt;
    auto args = parse_number_list(text.substr(i + 1, close - i - 1));
    if (!args) return std::nullopt;
    const auto& v = *args;
    Affine m;
    constexpr double kDeg = 3.14159265358979323846 / 180.0;
    if (name == "matrix" && v.size() == 6) {
      m = {v[0], v[1], v[2], v[3], v[4], v[5]};
    } else if (name == "translate" && (v.size() == 1 || v.size() == 2)) {
      m = Affine::translate(v[0], v.size() == 2 ? v[1] : 0.0);
    } else if (name == "scale" && (v.size() == 1 || v.size() == 2)) {
      m = Affine::scale(v[0], v.size() == 2 ? v[1] : v[0]);
    } else if (name == "rotate" && (v.size() == 1 || v.size() == 3)) {
      double r = v[0] * kDeg;
      Affine rot{std::cos(r), std::sin(r), -std::sin(r), std::cos(r), 0, 0};
      if (v.size() == 3) {
        m = Affine::translate(v[1], v[2]).then_after(rot).then_after(Affine::translate(-v[1], -v[2]));
      } else {
        m = rot;
      }
    } else if (name == "skewX" && v.size() == 1) {
      m = {1, 0, std::tan(v[0] * kDeg), 1, 0, 0};
    } else if (name == "skewY" && v.size() == 1) {
      m = {1, std::tan(v[0] * kDeg), 0, 1, 0, 0};
    } else {
      return std::nullopt;
    }
    result = result.then_after(m);
    i = close + 1;
    skip();
  }
  return result;
}

}  // namespace canvascot
