import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // The e2e test boots the Python service in a subprocess.
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
