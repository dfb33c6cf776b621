#include <math.h>
#include <stdio.h>

#include "nash_seek.h"

static int check(NsStatus s, const char *what) {
    if (s != NS_STATUS_OK) {
        const char *msg = ns_last_error_message();
        fprintf(stderr, "%s failed (%d): %s\n", what, (int)s, msg ? msg : "?");
        return 1;
    }
    return 0;
}

int main(void) {
    NsWirelessParams params = {2, 10.0, 2.0, 1.0};
    double variance[4] = {1.0, 0.01, 0.01, 1.0};
    double power[2];
    if (check(ns_wireless_equilibrium(&params, variance, power), "equilibrium")) return 1;
    printf("p* = %.4f %.4f\n", power[0], power[1]);
    if (fabs(power[0] - 4.0 / 1.01) > 1e-12) return 1;

    params.bandwidth = 1.0;
    if (ns_wireless_equilibrium(&params, variance, power) != NS_STATUS_INFEASIBLE) return 1;
    printf("infeasible: %s\n", ns_last_error_message());

    NsTrajectory *t = NULL;
    if (check(ns_run_reference(0, 20000, &t), "run")) return 1;
    double mean[2];
    if (check(ns_trajectory_windowed_mean(t, 0.1, true, mean), "windowed mean")) return 1;
    printf("records %zu, windowed mean %.3f %.3f\n", ns_trajectory_len(t), mean[0], mean[1]);
    ns_trajectory_free(t);
    return 0;
}
