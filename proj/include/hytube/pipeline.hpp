#pragma once

#include "hytube/gait.hpp"
#include "hytube/io.hpp"
#include "hytube/verify.hpp"

namespace hytube {

/// Periodic gait with the step-to-step impulse gain placed at cfg.poles.
GaitSpec synthesize_controlled_gait(const RunConfig& cfg, StepController* controller = nullptr);

struct Baseline {
  Eigen::MatrixXd A_cl;
  InitialShape shape;
  RescaleResult rescale;
};

/// alpha0 from the closed-loop step matrix, then the largest verified scale.
Baseline verify_baseline(const GaitSpec& gait, const RunConfig& cfg);

/// Re-runs the verification a certificate records, tube included.
VerificationResult reverify(const GaitSpec& gait, const Certificate& cert, const RunConfig& cfg);

}  // namespace hytube
