#pragma once

// Seeded generators for the six artificial MIL problems.
//
// Every bag draws from its own streams, keyed by (seed, kind, global bag
// index, role), so the content of bag b does not depend on how many values
// other bags consumed. Positive bags come first (ids p000, p001, ...), then
// negative bags (n000, ...).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "milchar/data.hpp"
#include "milchar/error.hpp"
#include "milchar/rng.hpp"
#include "milchar/text.hpp"

namespace milchar {

enum class GenKind { gaussian, maron, mi_concept, difficult, rotated, widened };

inline constexpr std::array<GenKind, 6> kAllGenKinds = {GenKind::gaussian,  GenKind::maron,   GenKind::mi_concept,
                                                        GenKind::difficult, GenKind::rotated, GenKind::widened};

inline std::string_view kind_name(GenKind k) {
  switch (k) {
    case GenKind::gaussian: return "gaussian";
    case GenKind::maron: return "maron";
    case GenKind::mi_concept: return "concept";
    case GenKind::difficult: return "difficult";
    case GenKind::rotated: return "rotated";
    case GenKind::widened: return "widened";
  }
  return "?";
}

// Names used for the generated files, following the usual benchmark labels.
inline std::string_view default_dataset_name(GenKind k) {
  switch (k) {
    case GenKind::gaussian: return "Gaussian-MI";
    case GenKind::maron: return "Maron-MI";
    case GenKind::mi_concept: return "MI-concept";
    case GenKind::difficult: return "Difficult-MI";
    case GenKind::rotated: return "Rotated-MI";
    case GenKind::widened: return "Widened-MI";
  }
  return "?";
}

inline std::optional<GenKind> parse_kind(std::string_view s) {
  for (auto k : kAllGenKinds) {
    if (kind_name(k) == s) return k;
  }
  return std::nullopt;
}

struct GenSpec {
  GenKind kind = GenKind::gaussian;
  std::size_t n_pos = 1;
  std::size_t n_neg = 1;
  std::size_t bag_size_min = 1;
  std::size_t bag_size_max = 1;
  std::uint64_t seed = 0;
  // Per-kind real parameters; see default_params().
  std::map<std::string, double> params;

  double param(const std::string& key) const {
    auto it = params.find(key);
    if (it == params.end()) throw UsageError("generator spec lacks parameter '" + key + "'");
    return it->second;
  }

  friend bool operator==(const GenSpec&, const GenSpec&) = default;
};

inline std::map<std::string, double> default_params(GenKind kind) {
  switch (kind) {
    case GenKind::gaussian: return {{"concept_x", 7.0}, {"concept_y", 1.0}};
    case GenKind::maron: return {{"domain", 100.0}, {"concept_width", 5.0}};
    case GenKind::mi_concept: return {{"offset", 2.0}};
    case GenKind::difficult: return {{"shift", 2.0}, {"var_long", 9.0}, {"var_short", 1.0}};
    case GenKind::rotated: return {{"angle_deg", 10.0}, {"var_long", 9.0}, {"var_short", 1.0}};
    case GenKind::widened: return {{"widen", 1.5}};
  }
  return {};
}

// Bag counts and bag-size ranges of the standard artificial benchmarks.
inline GenSpec default_spec(GenKind kind, std::uint64_t seed) {
  GenSpec s;
  s.kind = kind;
  s.seed = seed;
  s.params = default_params(kind);
  switch (kind) {
    case GenKind::gaussian: s.n_pos = 50; s.n_neg = 50; s.bag_size_min = 5; s.bag_size_max = 9; break;
    case GenKind::maron: s.n_pos = 50; s.n_neg = 50; s.bag_size_min = 10; s.bag_size_max = 10; break;
    case GenKind::mi_concept: s.n_pos = 10; s.n_neg = 10; s.bag_size_min = 5; s.bag_size_max = 8; break;
    case GenKind::difficult: s.n_pos = 10; s.n_neg = 40; s.bag_size_min = 5; s.bag_size_max = 9; break;
    case GenKind::rotated: s.n_pos = 30; s.n_neg = 30; s.bag_size_min = 15; s.bag_size_max = 29; break;
    case GenKind::widened: s.n_pos = 30; s.n_neg = 30; s.bag_size_min = 15; s.bag_size_max = 29; break;
  }
  return s;
}

inline void validate(const GenSpec& s) {
  if (s.n_pos < 1 || s.n_neg < 1) throw UsageError("generator spec needs n_pos >= 1 and n_neg >= 1");
  if (s.bag_size_min < 1 || s.bag_size_min > s.bag_size_max) {
    throw UsageError("generator spec needs 1 <= bag_size_min <= bag_size_max");
  }
  for (const auto& [key, _] : default_params(s.kind)) s.param(key);
  for (const auto& [key, value] : s.params) {
    if (!default_params(s.kind).contains(key)) {
      throw UsageError("unknown parameter '" + key + "' for generator kind " + std::string(kind_name(s.kind)));
    }
    if (!std::isfinite(value)) throw UsageError("parameter '" + key + "' is not finite");
  }
  // The positive bags of these kinds hold one extra planted instance.
  if ((s.kind == GenKind::maron || s.kind == GenKind::mi_concept) && s.bag_size_min < 2) {
    throw UsageError("maron/concept generators need bag_size_min >= 2");
  }
  if (s.kind == GenKind::maron && (s.param("domain") <= 0.0 || s.param("concept_width") <= 0.0 ||
                                   s.param("concept_width") > s.param("domain"))) {
    throw UsageError("maron generator needs 0 < concept_width <= domain");
  }
  if (s.kind == GenKind::difficult || s.kind == GenKind::rotated) {
    if (s.param("var_long") <= 0.0 || s.param("var_short") <= 0.0) throw UsageError("variances must be positive");
  }
  if (s.kind == GenKind::widened && s.param("widen") <= 0.0) throw UsageError("widening factor must be positive");
}

// ---------------------------------------------------------------------------
// Key-value sidecar ("key=value" per line, '#' comments).

inline std::string format_gen_spec(const GenSpec& s) {
  std::ostringstream out;
  out << "kind=" << kind_name(s.kind) << '\n'
      << "n_pos=" << s.n_pos << '\n'
      << "n_neg=" << s.n_neg << '\n'
      << "bag_size_min=" << s.bag_size_min << '\n'
      << "bag_size_max=" << s.bag_size_max << '\n'
      << "seed=" << s.seed << '\n';
  for (const auto& [key, value] : s.params) out << "param." << key << '=' << text::format_double(value) << '\n';
  return out.str();
}

inline GenSpec parse_gen_spec(std::string_view content) {
  std::map<std::string, std::string, std::less<>> kv;
  std::size_t line_no = 0;
  for (auto raw : text::split(content, '\n')) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError("spec line " + std::to_string(line_no) + ": expected key=value");
    std::string key(text::trim(line.substr(0, eq)));
    if (!kv.emplace(key, std::string(text::trim(line.substr(eq + 1)))).second) {
      throw DataError("spec line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }
  auto take = [&](std::string_view key) -> std::string {
    auto it = kv.find(key);
    if (it == kv.end()) throw DataError("spec: missing key '" + std::string(key) + "'");
    auto v = it->second;
    kv.erase(it);
    return v;
  };
  auto take_count = [&](std::string_view key) {
    auto v = text::parse_int<std::size_t>(take(key));
    if (!v) throw DataError("spec: '" + std::string(key) + "' is not a count");
    return *v;
  };

  GenSpec s;
  const auto kind = parse_kind(take("kind"));
  if (!kind) throw DataError("spec: unknown generator kind");
  s.kind = *kind;
  s.n_pos = take_count("n_pos");
  s.n_neg = take_count("n_neg");
  s.bag_size_min = take_count("bag_size_min");
  s.bag_size_max = take_count("bag_size_max");
  auto seed = text::parse_int<std::uint64_t>(take("seed"));
  if (!seed) throw DataError("spec: 'seed' is not an unsigned integer");
  s.seed = *seed;
  s.params = default_params(s.kind);
  for (const auto& [key, value] : kv) {
    if (!key.starts_with("param.")) throw DataError("spec: unknown key '" + key + "'");
    auto v = text::parse_double(value);
    if (!v) throw DataError("spec: parameter '" + key + "' is not a number");
    s.params[key.substr(6)] = *v;
  }
  try {
    validate(s);
  } catch (const UsageError& e) {
    throw DataError(std::string("spec: ") + e.what());
  }
  return s;
}

// ---------------------------------------------------------------------------
// Generation

// The dataset plus generator-side truth: which instances were drawn from the
// planted component (concept instances, or every instance of a positive bag
// for the distribution-shift kinds). Classifiers never see this.
struct SynthResult {
  MilDataset dataset;
  std::vector<std::vector<bool>> planted;
};

namespace detail {

enum class Role : std::uint64_t { size = 1, planted_count = 2, content = 3 };

inline std::uint64_t kind_tag(GenKind k) { return static_cast<std::uint64_t>(k) + 101; }

inline CounterRng bag_stream(const GenSpec& s, std::size_t bag, Role role) {
  return CounterRng(derive_key(s.seed, kind_tag(s.kind), static_cast<std::uint64_t>(bag),
                               static_cast<std::uint64_t>(role)));
}

inline std::string bag_id(bool positive, std::size_t i) {
  std::string num = std::to_string(i);
  if (num.size() < 3) num.insert(0, 3 - num.size(), '0');
  return (positive ? "p" : "n") + num;
}

// Calls fill(bag_index, positive, size, content_rng, x, planted) for every bag.
template <typename Fill>
SynthResult generate_bags(const GenSpec& s, GenKind expected, Fill&& fill) {
  if (s.kind != expected) {
    throw UsageError("generator for " + std::string(kind_name(expected)) + " called with kind " +
                     std::string(kind_name(s.kind)));
  }
  validate(s);
  std::vector<Bag> bags;
  std::vector<std::vector<bool>> planted;
  const std::size_t total = s.n_pos + s.n_neg;
  bags.reserve(total);
  for (std::size_t b = 0; b < total; ++b) {
    const bool positive = b < s.n_pos;
    auto size_rng = bag_stream(s, b, Role::size);
    const auto n = static_cast<std::size_t>(size_rng.uniform_int(s.bag_size_min, s.bag_size_max));
    auto content_rng = bag_stream(s, b, Role::content);
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), 2);
    std::vector<bool> mask(n, false);
    fill(b, positive, n, content_rng, x, mask);
    bags.emplace_back(bag_id(positive, positive ? b : b - s.n_pos), std::move(x),
                      positive ? BagLabel::positive : BagLabel::negative);
    planted.push_back(std::move(mask));
  }
  return {MilDataset(std::string(default_dataset_name(s.kind)), std::move(bags)), std::move(planted)};
}

// Zero-mean Gaussian with covariance diag(var_long, var_short), rotated by
// `angle` radians.
inline Eigen::Vector2d elongated(CounterRng& rng, double var_long, double var_short, double angle) {
  const double a = rng.normal() * std::sqrt(var_long);
  const double b = rng.normal() * std::sqrt(var_short);
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * a - s * b, s * a + c * b};
}

}  // namespace detail

// Positive bags hold m ~ U{1..ceil(n/2)} instances from N(concept, I); all
// other instances come from N(0, I).
inline SynthResult gen_gaussian_full(const GenSpec& s) {
  return detail::generate_bags(s, GenKind::gaussian, [&](std::size_t b, bool positive, std::size_t n,
                                                         CounterRng& rng, Eigen::MatrixXd& x, std::vector<bool>& mask) {
    std::size_t m = 0;
    if (positive) {
      auto count_rng = detail::bag_stream(s, b, detail::Role::planted_count);
      m = static_cast<std::size_t>(count_rng.uniform_int(1, (n + 1) / 2));
    }
    const double cx = s.param("concept_x");
    const double cy = s.param("concept_y");
    for (std::size_t i = 0; i < n; ++i) {
      const bool planted = i < m;
      const double ox = planted ? cx : 0.0;
      const double oy = planted ? cy : 0.0;
      const auto r = static_cast<Eigen::Index>(i);
      x(r, 0) = rng.normal(ox, 1.0);
      x(r, 1) = rng.normal(oy, 1.0);
      mask[i] = planted;
    }
  });
}

// Uniform background on [0, domain]^2. A positive bag replaces one background
// instance by a draw from the concept_width square at the center.
inline SynthResult gen_maron_full(const GenSpec& s) {
  return detail::generate_bags(s, GenKind::maron, [&](std::size_t, bool positive, std::size_t n, CounterRng& rng,
                                                      Eigen::MatrixXd& x, std::vector<bool>& mask) {
    const double domain = s.param("domain");
    const double half = s.param("concept_width") / 2.0;
    const double center = domain / 2.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool planted = positive && i == 0;
      const auto r = static_cast<Eigen::Index>(i);
      if (planted) {
        x(r, 0) = rng.uniform(center - half, center + half);
        x(r, 1) = rng.uniform(center - half, center + half);
      } else {
        x(r, 0) = rng.uniform(0.0, domain);
        x(r, 1) = rng.uniform(0.0, domain);
      }
      mask[i] = planted;
    }
  });
}

// Background is a uniform mixture of unit Gaussians at (+o,-o), (-o,+o),
// (-o,-o); positive bags replace one instance by a draw at (+o,+o).
inline SynthResult gen_concept_full(const GenSpec& s) {
  return detail::generate_bags(s, GenKind::mi_concept, [&](std::size_t, bool positive, std::size_t n, CounterRng& rng,
                                                        Eigen::MatrixXd& x, std::vector<bool>& mask) {
    const double o = s.param("offset");
    const std::array<Eigen::Vector2d, 3> centers = {Eigen::Vector2d(o, -o), Eigen::Vector2d(-o, o),
                                                    Eigen::Vector2d(-o, -o)};
    for (std::size_t i = 0; i < n; ++i) {
      const bool planted = positive && i == 0;
      const Eigen::Vector2d c = planted ? Eigen::Vector2d(o, o) : centers[rng.uniform_int(0, 2)];
      const auto r = static_cast<Eigen::Index>(i);
      x(r, 0) = rng.normal(c.x(), 1.0);
      x(r, 1) = rng.normal(c.y(), 1.0);
      mask[i] = planted;
    }
  });
}

// N(0, diag(var_long, var_short)) for negative bags; positive bags use the
// same covariance with the mean moved by `shift` along feature 1.
inline SynthResult gen_difficult_full(const GenSpec& s) {
  return detail::generate_bags(s, GenKind::difficult, [&](std::size_t, bool positive, std::size_t n, CounterRng& rng,
                                                          Eigen::MatrixXd& x, std::vector<bool>& mask) {
    const double shift = positive ? s.param("shift") : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = detail::elongated(rng, s.param("var_long"), s.param("var_short"), 0.0);
      const auto r = static_cast<Eigen::Index>(i);
      x(r, 0) = v.x() + shift;
      x(r, 1) = v.y();
      mask[i] = positive;
    }
  });
}

// Positive bags draw from the negative distribution rotated by angle_deg.
inline SynthResult gen_rotated_full(const GenSpec& s) {
  return detail::generate_bags(s, GenKind::rotated, [&](std::size_t, bool positive, std::size_t n, CounterRng& rng,
                                                        Eigen::MatrixXd& x, std::vector<bool>& mask) {
    const double angle = positive ? s.param("angle_deg") * std::numbers::pi / 180.0 : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      x.row(static_cast<Eigen::Index>(i)) = detail::elongated(rng, s.param("var_long"), s.param("var_short"), angle);
      mask[i] = positive;
    }
  });
}

// N(0, I) for negative bags, N(0, widen * I) for positive bags.
inline SynthResult gen_widened_full(const GenSpec& s) {
  return detail::generate_bags(s, GenKind::widened, [&](std::size_t, bool positive, std::size_t n, CounterRng& rng,
                                                        Eigen::MatrixXd& x, std::vector<bool>& mask) {
    const double sd = positive ? std::sqrt(s.param("widen")) : 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      x(r, 0) = rng.normal(0.0, sd);
      x(r, 1) = rng.normal(0.0, sd);
      mask[i] = positive;
    }
  });
}

inline SynthResult generate_full(const GenSpec& s) {
  switch (s.kind) {
    case GenKind::gaussian: return gen_gaussian_full(s);
    case GenKind::maron: return gen_maron_full(s);
    case GenKind::mi_concept: return gen_concept_full(s);
    case GenKind::difficult: return gen_difficult_full(s);
    case GenKind::rotated: return gen_rotated_full(s);
    case GenKind::widened: return gen_widened_full(s);
  }
  throw UsageError("unknown generator kind");
}

inline MilDataset gen_gaussian(const GenSpec& s) { return gen_gaussian_full(s).dataset; }
inline MilDataset gen_maron(const GenSpec& s) { return gen_maron_full(s).dataset; }
inline MilDataset gen_concept(const GenSpec& s) { return gen_concept_full(s).dataset; }
inline MilDataset gen_difficult(const GenSpec& s) { return gen_difficult_full(s).dataset; }
inline MilDataset gen_rotated(const GenSpec& s) { return gen_rotated_full(s).dataset; }
inline MilDataset gen_widened(const GenSpec& s) { return gen_widened_full(s).dataset; }
inline MilDataset generate(const GenSpec& s) { return generate_full(s).dataset; }

}  // namespace milchar
