/* Minimal C consumer of the rephase engine.
 *
 * Build (after `cargo build -p rephase-ffi --release`):
 *
 *   cc smoke.c -I../include \
 *      ../../../target/release/librephase_ffi.a -lpthread -ldl -lm -o smoke
 */
#include <assert.h>
#include <stdio.h>

#include "rephase.h"

int main(void) {
    double omega = 10000.0, dipole = 1.0;
    RpEngine *engine = NULL;
    RpStatus st = rp_engine_new_obo(&omega, &dipole, 1, NULL, 1, 1,
                                    100.0, 100.0, 300.0, 10000.0, &engine);
    assert(st == RP_STATUS_OK);

    double re = 0.0, im = 0.0;
    st = rp_engine_r2_exact(engine, 100.0, 0.0, 100.0, &re, &im);
    assert(st == RP_STATUS_OK);
    printf("R2(t=100, T=0, tau=100) = %.12f + %.12fi\n", re, im);

    st = rp_engine_r2_exact(engine, -1.0, 0.0, 0.0, &re, &im);
    printf("negative time -> %s\n", rp_status_message(st));
    assert(st == RP_STATUS_OUT_OF_DOMAIN);

    rp_engine_free(engine);
    printf("rephase %s ok\n", rp_version());
    return 0;
}
