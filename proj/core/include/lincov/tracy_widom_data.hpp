#pragma once

// Knot table for the GOE Tracy-Widom CDF, generated at build time from
// core/data/tracy_widom_f1.csv (see core/data/generate_tracy_widom_f1.py
// for how the CSV itself is produced).

namespace lincov::detail {

extern const double kTwGridX0;
extern const double kTwGridStep;
extern const int kTwGridSize;
extern const double kTwF1[];

}  // namespace lincov::detail
