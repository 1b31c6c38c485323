#include <stdio.h>

/* Stride between output rows, rounded down to the alignment step. */
__attribute__((noinline))
static int row_stride(int width, int depth, int align) {
    int raw = width * depth;
    int padded = raw + align - 1;
    int stride = padded - padded % align;

    return stride;
}

int main(int argc, char **argv) {
    int width, depth, align;
    FILE *fp;

    if (argc < 2) {
        fprintf(stderr, "usage: %s <header-file>\n", argv[0]);
        return 2;
    }
    fp = fopen(argv[1], "r");
    if (fp == NULL) {
        perror(argv[1]);
        return 2;
    }
    if (fscanf(fp, "%d %d %d", &width, &depth, &align) != 3) {
        fprintf(stderr, "bad header\n");
        fclose(fp);
        return 2;
    }
    fclose(fp);
    printf("stride %d\n", row_stride(width, depth, align));
    return 0;
}
