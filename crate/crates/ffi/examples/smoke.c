/* End-to-end check of the C ABI. From the repository root:
 *
 *   cargo build -p topovec-ffi
 *   cc -std=c99 -Wall crates/ffi/examples/smoke.c \
 *      -Icrates/ffi/include -Ltarget/debug -ltopovec_ffi -lm -o smoke
 *   LD_LIBRARY_PATH=target/debug ./smoke
 */
#include <assert.h>
#include <math.h>
#include <stdio.h>
#include "topovec.h"

int main(void) {
  double coords[] = {0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0};
  tv_cloud *cloud = NULL;
  assert(tv_cloud_from_coords(coords, 4, 2, &cloud) == TV_OK);
  assert(tv_cloud_len(cloud) == 4);

  tv_diagram_set *set = NULL;
  assert(tv_persistence(cloud, 2, -1.0, 1, &set) == TV_OK);
  assert(tv_diagram_point_count(set, 1) == 1);

  double pair[2];
  size_t written = 0;
  assert(tv_diagram_points(set, 1, pair, 2, &written) == TV_OK);
  assert(written == 2);
  assert(fabs(pair[0] - 1.0) < 1e-12);
  assert(fabs(pair[1] - sqrt(2.0)) < 1e-12);

  tv_landscape *ls = NULL;
  assert(tv_landscape_build(set, 1, &ls) == TV_OK);
  double mid = (1.0 + sqrt(2.0)) / 2.0;
  assert(fabs(tv_landscape_evaluate(ls, 1, mid) - (sqrt(2.0) - 1.0) / 2.0) < 1e-12);

  tv_cloud *missing = NULL;
  assert(tv_cloud_load("/no/such.csv", false, &missing) == TV_DATA);
  printf("error surfaced: %s\n", tv_last_error_message());

  tv_landscape_free(ls);
  tv_diagram_set_free(set);
  tv_cloud_free(cloud);
  printf("C smoke test passed (version %s)\n", tv_version());
  return 0;
}
