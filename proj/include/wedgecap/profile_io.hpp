#pragma once

#include <filesystem>
#include <json.hpp>
#include <string_view>
#include <vector>

#include "wedgecap/contact_profile.hpp"
#include "wedgecap/fan_bounds.hpp"

namespace wedgecap {

enum class ProfileGenerator { Segments, Constant, Example1, Example2 };

constexpr int kDefaultExample1Depth = 8;
constexpr int kDefaultExample2Depth = 24;

/// Parsed profile file:
///   {"side": "+", "s_max": 1, "segments": [{"s_end": 0.5, "gamma": 1.2}, ...]}
///   {"side": "-", "generator": {"type": "example2", "gamma1": 1.0, "gamma2": 2.0, "depth": 24}}
/// The constant generator reads gamma1 and uses s_max (default 1); the example
/// generators live on (0, 1]. Angles are stored in radians.
struct ProfileSpec {
  Side side = Side::Plus;
  double s_max = 1.0;
  ProfileGenerator generator = ProfileGenerator::Segments;
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  int depth = 0;
  std::vector<double> s_ends;
  std::vector<double> gammas;

  ContactProfile build() const;
};

/// Structural problems throw ErrorCode::MalformedInput; value ranges are left
/// to the profile constructors. With `degrees` every angle is converted.
ProfileSpec parse_profile_spec(const nlohmann::json& j, bool degrees = false);
ProfileSpec parse_profile_text(std::string_view text, bool degrees = false);

/// Missing or unreadable files throw ErrorCode::MalformedInput.
nlohmann::json load_json_file(const std::filesystem::path& path);
ProfileSpec load_profile_spec(const std::filesystem::path& path, bool degrees = false);

enum class AdhesionSource { Auto, Sweep };

/// Auto uses the closed forms the generators admit (constant, first example,
/// ratio-4 log-periodic for the second) and the sweep table for segment lists.
AdhesionFunction adhesion_for(const ProfileSpec& spec, AdhesionKind kind, AdhesionSource source = AdhesionSource::Auto,
                              double eps_floor = 1e-10, int points_per_decade = 64);

}  // namespace wedgecap
