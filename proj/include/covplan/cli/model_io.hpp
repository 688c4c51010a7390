#pragma once

#include "covplan/historical.hpp"

#include <iosfwd>
#include <string>

namespace covplan::cli {

// Model file layout (CSV, header "name,center,weight"):
//   <covariate>,<center>,<weight>          one row per covariate, in order
//   __lambda__,<penalty>,
//   __m__,<historical rows>,
//   __nu_w__,<in-sample nu_w>,
//   __scale__,<covariate>,<sd>             one row per covariate
void write_model(std::ostream& out, const CompositeModel& model);
CompositeModel read_model(std::istream& in);

void write_model_file(const std::string& path, const CompositeModel& model);
CompositeModel read_model_file(const std::string& path);

}  // namespace covplan::cli
