#include "saac/dataset.hpp"

#include "saac/error.hpp"

namespace saac {

CbgIndex Geography::add(std::string cbg, std::string county, std::string state) {
  const auto idx = static_cast<CbgIndex>(cbgs_.size());
  auto [it, inserted] = index_.emplace(cbg, idx);
  require(inserted, "duplicate CBG " + cbg + " in geography");
  cbgs_.push_back(std::move(cbg));
  counties_.push_back(std::move(county));
  states_.push_back(std::move(state));
  return idx;
}

std::optional<CbgIndex> Geography::find(std::string_view cbg) const {
  auto it = index_.find(std::string(cbg));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

calibration::StateOf Geography::state_of_county() const {
  calibration::StateOf out;
  for (std::size_t i = 0; i < cbgs_.size(); ++i) {
    auto [it, inserted] = out.emplace(counties_[i], states_[i]);
    if (!inserted && it->second != states_[i])
      fail(ErrorKind::Validation, "county " + counties_[i] + " spans states " + it->second + " and " + states_[i]);
  }
  return out;
}

double NeighborhoodMonth::total_origin_devices() const {
  double total = 0.0;
  for (const auto& o : origin_devices) total += o.devices;
  return total;
}

}  // namespace saac
