#pragma once

#include <map>
#include <string>
#include <vector>

#include "urag/core/types.hpp"

namespace urag::strategies {

// Named templates with {placeholder} substitution. Defaults are built in;
// a directory of <name>.txt files overrides them (fusion pools use one
// prompt per line). Lines holding only an empty-valued placeholder are
// dropped, so optional blocks such as {confidence_block} vanish cleanly.
class PromptLibrary {
public:
    PromptLibrary();

    static PromptLibrary defaults() { return PromptLibrary(); }
    void load_dir(const std::string& dir);
    void export_dir(const std::string& dir) const;

    const std::string& raw(const std::string& name) const;
    std::string render(const std::string& name,
                       const std::map<std::string, std::string>& values) const;

    const std::vector<std::string>& fusion_system_pool() const { return fusion_system_; }
    const std::vector<std::string>& fusion_user_pool() const { return fusion_user_; }

    static std::string substitute(const std::string& tmpl,
                                  const std::map<std::string, std::string>& values);

private:
    std::map<std::string, std::string> templates_;
    std::vector<std::string> fusion_system_;
    std::vector<std::string> fusion_user_;
};

// "A. text" lines in option order; letters bind to positions at render time.
std::string render_options(const std::vector<std::string>& options);

// "Knowing that your previous answer had the following confidence:" block,
// probabilities at 2 decimals, option order preserved.
std::string render_confidence_block(const core::OptionDistribution& distribution);

}  // namespace urag::strategies
