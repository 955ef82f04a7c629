#include "wedgecap/profile_io.hpp"

#include <fstream>
#include <numbers>
#include <sstream>

#include "wedgecap/error.hpp"

namespace wedgecap {

namespace {

using nlohmann::json;

[[noreturn]] void malformed(const std::string& what) { fail(ErrorCode::MalformedInput, "profile: " + what); }

double number_field(const json& j, const char* key) {
  if (!j.contains(key)) malformed(std::string("missing field '") + key + "'");
  if (!j.at(key).is_number()) malformed(std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

double angle(double value, bool degrees) { return degrees ? value * std::numbers::pi / 180.0 : value; }

}  // namespace

ContactProfile ProfileSpec::build() const {
  switch (generator) {
    case ProfileGenerator::Constant: return constant_profile(gamma1, s_max, side);
    case ProfileGenerator::Example1: return example1_profile(gamma1, gamma2, depth, side);
    case ProfileGenerator::Example2: return example2_profile(gamma1, gamma2, depth, side);
    case ProfileGenerator::Segments: break;
  }
  return make_piecewise(side, s_ends, gammas, s_max);
}

ProfileSpec parse_profile_spec(const json& j, bool degrees) {
  if (!j.is_object()) malformed("expected a JSON object");
  ProfileSpec spec;
  if (j.contains("side")) {
    if (!j.at("side").is_string()) malformed("field 'side' must be \"+\" or \"-\"");
    const auto side = j.at("side").get<std::string>();
    if (side == "+") {
      spec.side = Side::Plus;
    } else if (side == "-") {
      spec.side = Side::Minus;
    } else {
      malformed("field 'side' must be \"+\" or \"-\"");
    }
  }
  if (j.contains("s_max")) spec.s_max = number_field(j, "s_max");

  const bool has_segments = j.contains("segments");
  const bool has_generator = j.contains("generator");
  if (has_segments == has_generator) malformed("exactly one of 'segments' and 'generator' is required");

  if (has_segments) {
    const json& segs = j.at("segments");
    if (!segs.is_array() || segs.empty()) malformed("'segments' must be a non-empty array");
    for (const json& seg : segs) {
      if (!seg.is_object()) malformed("each segment must be an object {s_end, gamma}");
      spec.s_ends.push_back(number_field(seg, "s_end"));
      spec.gammas.push_back(angle(number_field(seg, "gamma"), degrees));
    }
    if (!j.contains("s_max")) spec.s_max = spec.s_ends.back();
    return spec;
  }

  const json& gen = j.at("generator");
  if (!gen.is_object() || !gen.contains("type") || !gen.at("type").is_string()) {
    malformed("'generator' must be an object with a string 'type'");
  }
  const auto type = gen.at("type").get<std::string>();
  if (type == "constant") {
    spec.generator = ProfileGenerator::Constant;
    spec.gamma1 = spec.gamma2 = angle(number_field(gen, "gamma1"), degrees);
    return spec;
  }
  if (type != "example1" && type != "example2") malformed("unknown generator type '" + type + "'");
  spec.generator = type == "example1" ? ProfileGenerator::Example1 : ProfileGenerator::Example2;
  spec.gamma1 = angle(number_field(gen, "gamma1"), degrees);
  spec.gamma2 = angle(number_field(gen, "gamma2"), degrees);
  spec.depth = spec.generator == ProfileGenerator::Example1 ? kDefaultExample1Depth : kDefaultExample2Depth;
  if (gen.contains("depth")) {
    if (!gen.at("depth").is_number_integer()) malformed("generator 'depth' must be an integer");
    spec.depth = gen.at("depth").get<int>();
  }
  if (j.contains("s_max") && spec.s_max != 1.0) {
    fail(ErrorCode::InvalidArgument, "profile: example generators live on (0, 1]; s_max must be 1");
  }
  spec.s_max = 1.0;
  return spec;
}

ProfileSpec parse_profile_text(std::string_view text, bool degrees) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
  return parse_profile_spec(j, degrees);
}

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::MalformedInput, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return json::parse(buffer.str());
  } catch (const json::exception& e) {
    fail(ErrorCode::MalformedInput, "invalid JSON in '" + path.string() + "': " + e.what());
  }
}

ProfileSpec load_profile_spec(const std::filesystem::path& path, bool degrees) {
  return parse_profile_spec(load_json_file(path), degrees);
}

AdhesionFunction adhesion_for(const ProfileSpec& spec, AdhesionKind kind, AdhesionSource source, double eps_floor,
                              int points_per_decade) {
  const ContactProfile profile = spec.build();
  if (source == AdhesionSource::Auto) {
    switch (spec.generator) {
      case ProfileGenerator::Constant: return AdhesionFunction::constant(kind, spec.gamma1);
      case ProfileGenerator::Example1: return AdhesionFunction::example1(kind, spec.gamma1, spec.gamma2);
      case ProfileGenerator::Example2: return AdhesionFunction::log_periodic(kind, profile, 4.0);
      case ProfileGenerator::Segments: break;
    }
  }
  return AdhesionFunction::sweep(kind, profile, eps_floor, points_per_decade);
}

}  // namespace wedgecap
