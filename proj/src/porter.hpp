#pragma once

#include <string>

namespace ureca {

// Porter stemming algorithm (the classic 1980 rule set) over lowercase ASCII.
// Words shorter than three letters come back unchanged.
std::string porter_stem(const std::string& word);

} // namespace ureca
