#include <stdio.h>
#include <string.h>

#define BUF_SIZE 64

/* Squeeze a hole out of the record buffer by copying the tail down. */
static void close_gap(unsigned char *buf, int hole, int gap, int tail) {
    unsigned char *dst = buf + hole;
    unsigned char *src = buf + hole + gap;
    size_t len = (size_t)tail;

    memcpy(dst, src, len);
}

int main(int argc, char **argv) {
    unsigned char buf[BUF_SIZE];
    int hole, gap, tail;
    FILE *fp;

    if (argc < 2) {
        fprintf(stderr, "usage: %s <layout-file>\n", argv[0]);
        return 2;
    }
    fp = fopen(argv[1], "r");
    if (fp == NULL) {
        perror(argv[1]);
        return 2;
    }
    if (fscanf(fp, "%d %d %d", &hole, &gap, &tail) != 3) {
        fprintf(stderr, "bad layout\n");
        fclose(fp);
        return 2;
    }
    fclose(fp);
    if (hole < 0 || gap < 1 || tail < 0 || hole + gap + tail > BUF_SIZE) {
        fprintf(stderr, "layout out of range\n");
        return 2;
    }
    memset(buf, 'x', sizeof(buf));
    close_gap(buf, hole, gap, tail);
    printf("compacted %d bytes\n", tail);
    return 0;
}
