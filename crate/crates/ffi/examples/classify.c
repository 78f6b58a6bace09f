#include <stdio.h>
#include "ptchain.h"
int main(void) {
  const char *sq[] = {"4", "3"};
  PtcChain *c = NULL;
  if (ptc_chain_symmetrized_squared(4, sq, 2, &c) != PTC_STATUS_OK) return 1;
  PtcVerdict v;
  ptc_classify(c, &v);
  printf("dim=%zu verdict=%d\n", ptc_chain_dim(c), (int)v);
  ptc_chain_free(c);
  return v == PTC_VERDICT_REAL_DEGENERATE ? 0 : 2;
}
