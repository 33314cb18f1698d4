#include "auxmi/error.hpp"

namespace auxmi {

namespace {

std::string join(const std::vector<std::string>& items) {
  std::string s;
  for (std::size_t i = 0; i < items.size(); ++i) s += (i ? ", " : "") + items[i];
  return s;
}

}  // namespace

SeparationError::SeparationError(std::string variable, std::vector<std::string> predictors)
    : FitError("perfect prediction while imputing '" + variable + "' from {" + join(predictors) + "}", "separation"),
      variable_(std::move(variable)),
      predictors_(std::move(predictors)) {}

}  // namespace auxmi
