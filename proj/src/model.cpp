#include "dualpotts/model.hpp"

#include <cmath>
#include <sstream>

#include "dualpotts/errors.hpp"
#include "dualpotts/rng.hpp"
#include "json.hpp"

namespace dualpotts {

namespace {

using nlohmann::json;

void check_values(const std::vector<double>& values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0.0) {
      std::ostringstream os;
      os << what << " " << i << " = " << values[i] << " must be finite and >= 0";
      throw InvalidArgument(os.str());
    }
  }
}

}  // namespace

std::vector<Bond> torus_bonds(int width, int height) {
  std::vector<Bond> bonds;
  bonds.reserve(2 * std::size_t(width) * std::size_t(height));
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      const auto s = static_cast<SiteId>(r * width + c);
      const auto right = static_cast<SiteId>(r * width + (c + 1) % width);
      const auto down = static_cast<SiteId>(((r + 1) % height) * width + c);
      bonds.push_back({s, right, BondAxis::horizontal});
      bonds.push_back({s, down, BondAxis::vertical});
    }
  }
  return bonds;
}

PottsModel::PottsModel(int width, int height, int q, std::vector<double> couplings,
                       std::vector<double> fields)
    : width_(width), height_(height), q_(q), couplings_(std::move(couplings)),
      fields_(std::move(fields)) {
  if (width < 3 || height < 3) {
    throw InvalidArgument("torus width and height must both be >= 3");
  }
  if (q < 2) throw InvalidArgument("alphabet size q must be >= 2");
  const std::size_t n = std::size_t(width) * std::size_t(height);
  if (couplings_.size() != 2 * n) {
    throw InvalidArgument("expected " + std::to_string(2 * n) + " couplings, got " +
                          std::to_string(couplings_.size()));
  }
  if (fields_.size() != n) {
    throw InvalidArgument("expected " + std::to_string(n) + " fields, got " +
                          std::to_string(fields_.size()));
  }
  check_values(couplings_, "coupling of bond");
  check_values(fields_, "field of site");
  bonds_ = torus_bonds(width, height);
  incident_.resize(4 * n);
  for (SiteId s = 0; s < n; ++s) {
    const int r = int(s) / width;
    const int c = int(s) % width;
    const auto left = static_cast<SiteId>(r * width + (c + width - 1) % width);
    const auto up = static_cast<SiteId>(((r + height - 1) % height) * width + c);
    incident_[4 * s + 0] = 2 * s;
    incident_[4 * s + 1] = 2 * s + 1;
    incident_[4 * s + 2] = 2 * left;
    incident_[4 * s + 3] = 2 * up + 1;
  }
  for (double h : fields_) has_field_ = has_field_ || h > 0.0;
}

PottsModel PottsModel::with_couplings(std::vector<double> couplings) const {
  return PottsModel(width_, height_, q_, std::move(couplings), fields_);
}

PottsModel PottsModel::with_fields(std::vector<double> fields) const {
  return PottsModel(width_, height_, q_, couplings_, std::move(fields));
}

bool PottsModel::operator==(const PottsModel& other) const {
  return width_ == other.width_ && height_ == other.height_ && q_ == other.q_ &&
         couplings_ == other.couplings_ && fields_ == other.fields_;
}

std::vector<double> resolve_values(const ValueSpec& spec, std::size_t count, bool per_bond) {
  const char* what = per_bond ? "couplings" : "fields";
  return std::visit(
      [&](const auto& s) -> std::vector<double> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantValues>) {
          return std::vector<double>(count, s.value);
        } else if constexpr (std::is_same_v<T, ExplicitValues>) {
          if (s.values.size() != count) {
            throw InvalidArgument(std::string("explicit ") + what + " list has " +
                                  std::to_string(s.values.size()) + " entries, expected " +
                                  std::to_string(count));
          }
          return s.values;
        } else {
          if (!(s.lo >= 0.0) || !(s.hi >= s.lo) || !std::isfinite(s.hi)) {
            throw InvalidArgument(std::string("uniform ") + what +
                                  " range must satisfy 0 <= lo <= hi");
          }
          Rng rng = make_stream(s.seed, per_bond ? StreamTag::couplings : StreamTag::fields);
          std::vector<double> out(count);
          for (auto& v : out) v = s.lo + (s.hi - s.lo) * uniform01(rng);
          return out;
        }
      },
      spec);
}

PottsModel build_torus_model(int width, int height, int q, const ValueSpec& couplings,
                             const ValueSpec& fields) {
  if (width < 3 || height < 3) {
    throw InvalidArgument("torus width and height must both be >= 3");
  }
  const std::size_t n = std::size_t(width) * std::size_t(height);
  return PottsModel(width, height, q, resolve_values(couplings, 2 * n, true),
                    resolve_values(fields, n, false));
}

namespace {

void check_configuration(const PottsModel& model, std::span<const Symbol> x) {
  if (x.size() != model.num_sites()) {
    throw InvalidArgument("configuration has " + std::to_string(x.size()) +
                          " entries, model has " + std::to_string(model.num_sites()) +
                          " sites");
  }
  for (Symbol v : x) {
    if (v >= Symbol(model.q())) throw InvalidArgument("configuration entry out of alphabet");
  }
}

}  // namespace

double log_weight(const PottsModel& model, std::span<const Symbol> x) {
  check_configuration(model, x);
  double lw = 0.0;
  const auto& bonds = model.bonds();
  for (BondId b = 0; b < bonds.size(); ++b) {
    if (x[bonds[b].tail] == x[bonds[b].head]) lw += model.coupling(b);
  }
  for (SiteId s = 0; s < x.size(); ++s) {
    if (x[s] == 0) lw += model.field(s);
  }
  return lw;
}

double hamiltonian(const PottsModel& model, std::span<const Symbol> x) {
  return -log_weight(model, x);
}

namespace {

ValueSpec spec_from_json(const json& j, const char* list_key) {
  if (j.contains("constant")) return ConstantValues{j.at("constant").get<double>()};
  if (j.contains(list_key)) {
    return ExplicitValues{j.at(list_key).get<std::vector<double>>()};
  }
  if (j.contains("uniform")) {
    const auto range = j.at("uniform").get<std::vector<double>>();
    if (range.size() != 2) throw InvalidArgument("\"uniform\" needs [lo, hi]");
    return UniformValues{range[0], range[1], j.value("seed", std::uint64_t{0})};
  }
  throw InvalidArgument(std::string("value spec needs one of constant, ") + list_key +
                        ", uniform");
}

}  // namespace

PottsModel model_from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
    const int width = j.at("width").get<int>();
    const int height = j.at("height").get<int>();
    const int q = j.at("q").get<int>();
    const ValueSpec couplings = spec_from_json(j.at("couplings"), "per_bond");
    const ValueSpec fields = j.contains("fields")
                                 ? spec_from_json(j.at("fields"), "per_site")
                                 : ValueSpec{ConstantValues{0.0}};
    return build_torus_model(width, height, q, couplings, fields);
  } catch (const json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
}

std::string model_to_json(const PottsModel& model) {
  json j;
  j["width"] = model.width();
  j["height"] = model.height();
  j["q"] = model.q();
  j["couplings"] = {{"per_bond", std::vector<double>(model.couplings().begin(),
                                                     model.couplings().end())}};
  j["fields"] = {{"per_site", std::vector<double>(model.fields().begin(),
                                                  model.fields().end())}};
  return j.dump();
}

std::uint64_t model_fingerprint(const PottsModel& model) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : model_to_json(model)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace dualpotts
