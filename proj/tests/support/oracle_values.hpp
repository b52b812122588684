#pragma once

// Reference values from tests/oracle/kummer_fixtures.py (mpmath, 60 digits)
// and tests/oracle/uniform_fit_threshold.py (numpy/scipy simulation).

namespace oracle {

inline constexpr double kLogM_05_5_10 = 2.612730065637774562775393;
inline constexpr double kLogM_05_5_m10 = -0.5849164828951585760408574;
inline constexpr double kLogM_05_2_5 = 2.242682746309894727576235;
inline constexpr double kLogM_05_5_2e6 = 1999937.316730189065945676;

inline constexpr double kG_05_5_10 = 0.499704686655371244945806;
inline constexpr double kG_05_5_1e4 = 0.9995499774864900351691455;
inline constexpr double kG_05_5000_m1e5 = 0.000004761969551458268452494171;
inline constexpr double kG_05_15_100 = 0.8541339628239380777188576;
inline constexpr double kG_05_15_m50 = 0.007833412446072866694035778;
inline constexpr double kG_05_1p5_5 = 0.764266221270432133558587;
inline constexpr double kG_05_5_m1e4 = 0.00004998250349995612750153554;

// Central difference of g(0.5, 5; .) at 10 with step 1e-5, in 60 digits.
inline constexpr double kDG_05_5_10 = 0.05014756946231810554934966;

// Upper bounds on |kappa_hat| for n = 10^4 uniform draws; the largest of
// 2000 simulated fits was 0.140 (p = 3) and 0.508 (p = 10).
inline constexpr double kUniformKappaBoundP3 = 0.15;
inline constexpr double kUniformKappaBoundP10 = 0.55;

}  // namespace oracle
