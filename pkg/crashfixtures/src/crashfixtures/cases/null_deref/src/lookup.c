#include <stdio.h>
#include <string.h>

static const int CODES[] = {200, 301, 404, 500};
static const char *NAMES[] = {"ok", "moved", "missing", "error"};

/* Map a status name to its entry in the code table. */
static const int *find_code(const char *name) {
    size_t i;

    for (i = 0; i < sizeof(NAMES) / sizeof(NAMES[0]); i++)
        if (strcmp(NAMES[i], name) == 0)
            return &CODES[i];
    return NULL;
}

int main(int argc, char **argv) {
    char name[64];
    const int *code;
    FILE *fp;

    if (argc < 2) {
        fprintf(stderr, "usage: %s <status-file>\n", argv[0]);
        return 2;
    }
    fp = fopen(argv[1], "r");
    if (fp == NULL) {
        perror(argv[1]);
        return 2;
    }
    if (fscanf(fp, "%63s", name) != 1) {
        fprintf(stderr, "empty status file\n");
        fclose(fp);
        return 2;
    }
    fclose(fp);
    code = find_code(name);
    printf("%s -> %d\n", name, *code);
    return 0;
}
