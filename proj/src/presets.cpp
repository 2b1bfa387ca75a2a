#include "rpslab/system_spec.hpp"

namespace rpslab {

namespace {

// Shipped systems. All constants are plain decimals so the parsed doubles
// are reproducible; 0.33333333333333331 and 0.083333333333333329 are the
// nearest doubles to 1/3 and 1/12.

const char* kGoodwin = R"(# Three-stage negative feedback loop with a seasonal forcing term.
[system] d=3 T=2pi
[drift] row=-8,0,0
[drift] row=1,-9,0
[drift] row=0,1,-10
[noise k=1] diag=0.5,0,0
[noise k=2] diag=0,0.25,0
[noise k=3] diag=0,0,0.33333333333333331
[feedback] kind=goodwin V=0.01 K=3 m=3
)";

const char* kOthmerTyson = R"(# Three-stage positive feedback loop with a seasonal forcing term.
[system] d=3 T=2pi
[drift] row=-8,0,0
[drift] row=1,-9,0
[drift] row=0,1,-10
[noise k=1] diag=0.5,0,0
[noise k=2] diag=0,0.25,0
[noise k=3] diag=0,0,0.33333333333333331
[feedback] kind=othmer_tyson k0=0.005 K=3 m=3
)";

const char* kCompetitive = R"(# Three competing species sharing a resource, pi-periodic forcing.
[system] d=3 T=pi
[drift] row=-4,0,0
[drift] row=0,-4,0
[drift] row=0,0,-4
[noise k=1] diag=0.5,0,0
[noise k=2] diag=0,0.5,0
[noise k=3] diag=0,0,0.5
[feedback] kind=competitive K1=40 K2=40 K3=40 m=2
)";

const char* kEx55 = R"(# Strongly damped three-stage positive feedback loop. The decay-rate
# choice lambda=1 and the exact Lipschitz extremum give the sharp
# small-gain constant for this system.
[system] d=3 T=2pi
[drift] row=-8,0,0
[drift] row=1,-9,0
[drift] row=0,1,-10
[noise k=1] diag=0.5,0,0
[noise k=2] diag=0,0.25,0
[noise k=3] diag=0,0,0.33333333333333331
[feedback] kind=othmer_tyson k0=0.083333333333333329 K=3 m=3 lipschitz=exact
[envelope] lambda=1
)";

}  // namespace

const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"goodwin", "othmer_tyson", "competitive",
                                                   "ex5_5"};
    return names;
}

bool is_preset(const std::string& name) {
    for (const auto& n : preset_names())
        if (n == name) return true;
    return false;
}

std::string preset_text(const std::string& name) {
    if (name == "goodwin") return kGoodwin;
    if (name == "othmer_tyson") return kOthmerTyson;
    if (name == "competitive") return kCompetitive;
    if (name == "ex5_5") return kEx55;
    throw Error("unknown preset '" + name + "' (available: goodwin, othmer_tyson, competitive, ex5_5)");
}

SystemSpec preset_system(const std::string& name) { return parse_system(preset_text(name)); }

}  // namespace rpslab
