#pragma once

#include <array>
#include <string_view>

namespace taxnet::detail {

struct IsoCountry {
  std::string_view alpha2;
  std::string_view alpha3;
  std::string_view name;
};

extern const std::array<IsoCountry, 249> kIsoCountries;

}  // namespace taxnet::detail
