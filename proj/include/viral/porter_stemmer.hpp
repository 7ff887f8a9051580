#ifndef VIRAL_PORTER_STEMMER_HPP
#define VIRAL_PORTER_STEMMER_HPP

#include <string>
#include <string_view>

namespace viral {

// Porter (1980) suffix-stripping stemmer, original rule set. Input must be
// lowercase ASCII letters; other strings are returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace viral

#endif  // VIRAL_PORTER_STEMMER_HPP
