#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace slqg {

// finite word over the positive integers; the root is the empty word
using UlamWord = std::vector<std::uint32_t>;

// "1.3.2"; the root prints as ""
inline std::string word_to_string(const UlamWord& w)
{
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i)
            s += '.';
        s += std::to_string(w[i]);
    }
    return s;
}

inline UlamWord child_word(const UlamWord& parent, std::uint32_t index)
{
    UlamWord w;
    w.reserve(parent.size() + 1);
    w = parent;
    w.push_back(index);
    return w;
}

} // namespace slqg
