#pragma once

#include <string>
#include <vector>

namespace stefan {

// Self-contained cross-checks over the whole stack at reduced problem sizes,
// intended for the CLI `verify` subcommand and CI smoke use. Each check pins
// its own tolerance; none of them depend on artifacts from other subcommands.
struct VerifyOptions {
    // Deliberately corrupts the latent-heat sign in the physics handed to the
    // feedforward builder (the plant keeps the true material). The tracking
    // check must then fail; a green report under injection means the suite
    // has lost its teeth.
    bool inject_kappa_flip = false;
    int threads = 1;
};

struct VerifyCheck {
    std::string name;
    bool passed = false;
    std::string detail;  // measured numbers, one line
};

struct VerifyReport {
    std::vector<VerifyCheck> checks;
    bool all_passed() const;
};

VerifyReport run_verification(const VerifyOptions& opt = {});

} // namespace stefan
